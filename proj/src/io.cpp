#include "mechrom/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace mechrom::io {

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kInvalidInput,
          "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::kInvalidInput,
          "cannot open '" + path.string() + "' for writing");
  return out;
}

std::string_view trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string_view> split(std::string_view text, char separator) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto next = text.find(separator, start);
    fields.push_back(trim(text.substr(start, next - start)));
    if (next == std::string_view::npos) break;
    start = next + 1;
  }
  return fields;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto begin = text.find_first_not_of(" \t\r", pos);
    if (begin == std::string_view::npos) break;
    auto end = text.find_first_of(" \t\r", begin);
    if (end == std::string_view::npos) end = text.size();
    fields.push_back(text.substr(begin, end - begin));
    pos = end;
  }
  return fields;
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(std::string_view text) {
  long long value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    return std::nullopt;
  return value;
}

}  // namespace

std::string format_double(double value) {
  if (value == 0.0) return "0";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                       std::chars_format::general, 17);
  require(ec == std::errc(), ErrorKind::kInvalidInput,
          "cannot format floating point value");
  return std::string(buffer, ptr);
}

// --- coordinate matrix files -------------------------------------------------

MatrixXd read_matrix_market(const fs::path& path) {
  auto in = open_input(path);
  const std::string file = path.string();
  std::string line;
  long line_number = 0;

  auto next_line = [&](bool skip_comments) -> bool {
    while (std::getline(in, line)) {
      ++line_number;
      const auto text = trim(line);
      if (text.empty()) continue;
      if (skip_comments && text.front() == '%') continue;
      return true;
    }
    return false;
  };

  if (!next_line(false)) throw FormatError(file, 1, "empty file");
  auto banner = split_whitespace(trim(line));
  if (!banner.empty() && banner.front() == "%%MatrixMarket")
    banner.erase(banner.begin());
  else if (!banner.empty() && banner.front() == "%%matrix")
    banner.front() = "matrix";
  if (banner.size() != 4 || banner[0] != "matrix" ||
      banner[1] != "coordinate" || banner[2] != "real")
    throw FormatError(file, line_number,
                      "expected '%%matrix coordinate real <symmetry>'");
  bool symmetric = false;
  if (banner[3] == "symmetric") {
    symmetric = true;
  } else if (banner[3] != "general") {
    throw FormatError(file, line_number,
                      "unsupported symmetry '" + std::string(banner[3]) + "'");
  }

  if (!next_line(true)) throw FormatError(file, line_number + 1, "missing size line");
  const auto sizes = split_whitespace(trim(line));
  if (sizes.size() != 3) throw FormatError(file, line_number, "expected 'rows cols nnz'");
  const auto rows = parse_integer(sizes[0]);
  const auto cols = parse_integer(sizes[1]);
  const auto nnz = parse_integer(sizes[2]);
  if (!rows || !cols || !nnz || *rows < 1 || *cols < 1 || *nnz < 0)
    throw FormatError(file, line_number, "invalid size line");
  if (symmetric && *rows != *cols)
    throw FormatError(file, line_number, "symmetric matrix must be square");

  MatrixXd matrix = MatrixXd::Zero(*rows, *cols);
  for (long long k = 0; k < *nnz; ++k) {
    if (!next_line(true))
      throw FormatError(file, line_number + 1,
                        "expected " + std::to_string(*nnz) + " entries, found " +
                            std::to_string(k));
    const auto fields = split_whitespace(trim(line));
    if (fields.size() != 3) throw FormatError(file, line_number, "expected 'row col value'");
    const auto i = parse_integer(fields[0]);
    const auto j = parse_integer(fields[1]);
    const auto value = parse_double(fields[2]);
    if (!i || !j || !value) throw FormatError(file, line_number, "malformed entry");
    if (*i < 1 || *i > *rows || *j < 1 || *j > *cols)
      throw FormatError(file, line_number, "index out of range");
    if (symmetric && *j > *i)
      throw FormatError(file, line_number,
                        "symmetric file must store the lower triangle");
    matrix(*i - 1, *j - 1) = *value;
    if (symmetric) matrix(*j - 1, *i - 1) = *value;
  }
  if (next_line(true))
    throw FormatError(file, line_number, "trailing data after declared entries");
  return matrix;
}

void write_matrix_market(const fs::path& path, const MatrixXd& matrix,
                         Symmetry symmetry) {
  bool symmetric = symmetry == Symmetry::kSymmetric;
  if (symmetry == Symmetry::kAuto)
    symmetric = matrix.rows() == matrix.cols() && matrix == matrix.transpose();
  require(!symmetric || matrix.rows() == matrix.cols(), ErrorKind::kInvalidInput,
          "symmetric output requires a square matrix");

  std::string body;
  long long nnz = 0;
  for (Index j = 0; j < matrix.cols(); ++j) {
    for (Index i = symmetric ? j : 0; i < matrix.rows(); ++i) {
      if (matrix(i, j) == 0.0) continue;
      body += std::to_string(i + 1) + " " + std::to_string(j + 1) + " " +
              format_double(matrix(i, j)) + "\n";
      ++nnz;
    }
  }
  auto out = open_output(path);
  out << "%%matrix coordinate real " << (symmetric ? "symmetric" : "general")
      << "\n"
      << matrix.rows() << " " << matrix.cols() << " " << nnz << "\n"
      << body;
}

SystemFiles SystemFiles::in(const fs::path& directory) {
  return {directory / "M.mtx", directory / "E.mtx", directory / "K.mtx",
          directory / "B.mtx"};
}

SecondOrderSystemd load_system(const SystemFiles& files) {
  MatrixXd M = read_matrix_market(files.mass);
  MatrixXd E = read_matrix_market(files.damping);
  MatrixXd K = read_matrix_market(files.stiffness);
  MatrixXd B = read_matrix_market(files.input);
  const Index n = M.rows();
  require(M.cols() == n && E.rows() == n && E.cols() == n && K.rows() == n &&
              K.cols() == n && B.rows() == n,
          ErrorKind::kInvalidInput,
          "operator files disagree on dimensions: M " + shape_of(M) + ", E " +
              shape_of(E) + ", K " + shape_of(K) + ", B " + shape_of(B));
  return SecondOrderSystemd(std::move(M), std::move(E), std::move(K),
                            std::move(B), files.mass.stem().string());
}

void save_system(const SecondOrderSystemd& system, const SystemFiles& files) {
  write_matrix_market(files.mass, system.mass());
  write_matrix_market(files.damping, system.damping());
  write_matrix_market(files.stiffness, system.stiffness());
  write_matrix_market(files.input, system.input_map(), Symmetry::kGeneral);
}

// --- snapshot CSV ------------------------------------------------------------

SnapshotTable read_snapshot_csv(const fs::path& path) {
  auto in = open_input(path);
  const std::string file = path.string();
  std::string line;
  long line_number = 0;
  std::size_t width = 0;
  bool have_header = false;
  std::vector<double> times;
  std::vector<double> values;

  while (std::getline(in, line)) {
    ++line_number;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split(text, ',');
    if (!have_header) {
      if (fields.empty() || fields.front() != "t")
        throw FormatError(file, line_number, "header must start with 't'");
      if (fields.size() < 2)
        throw FormatError(file, line_number, "header has no value columns");
      width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != width)
      throw FormatError(file, line_number,
                        "expected " + std::to_string(width) + " fields, found " +
                            std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto value = parse_double(fields[c]);
      if (!value)
        throw FormatError(file, line_number,
                          "column " + std::to_string(c + 1) + ": '" +
                              std::string(fields[c]) + "' is not a number");
      (c == 0 ? times : values).push_back(*value);
    }
  }
  if (!have_header) throw FormatError(file, 1, "empty file, expected a header");
  require(!times.empty(), ErrorKind::kInvalidInput,
          "'" + file + "' has a header but no snapshots");

  SnapshotTable table;
  const auto count = static_cast<Index>(times.size());
  const auto rows = static_cast<Index>(width - 1);
  table.times = Eigen::Map<const VectorXd>(times.data(), count);
  table.values =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>(values.data(), count, rows)
          .transpose();
  return table;
}

void write_snapshot_csv(const fs::path& path, const VectorXd& times,
                        const MatrixXd& values, const std::string& prefix) {
  require(times.size() == values.cols(), ErrorKind::kInvalidInput,
          "time grid has " + std::to_string(times.size()) +
              " entries but there are " + std::to_string(values.cols()) +
              " snapshots");
  std::string text = "t";
  for (Index i = 0; i < values.rows(); ++i)
    text += "," + prefix + std::to_string(i + 1);
  text += "\n";
  for (Index k = 0; k < values.cols(); ++k) {
    text += format_double(times(k));
    for (Index i = 0; i < values.rows(); ++i)
      text += "," + format_double(values(i, k));
    text += "\n";
  }
  auto out = open_output(path);
  out << text;
}

TrajectoryFiles TrajectoryFiles::in(const fs::path& directory, bool with_input,
                                    bool with_force) {
  TrajectoryFiles files{directory / "X.csv", directory / "Xd.csv",
                        directory / "Xdd.csv", std::nullopt, std::nullopt};
  if (with_input) files.U = directory / "U.csv";
  if (with_force) files.F = directory / "F.csv";
  return files;
}

void save_csv(const TrajectoryDatad& data, const TrajectoryFiles& files) {
  data.validate();
  write_snapshot_csv(files.X, data.times, data.X, "x_");
  write_snapshot_csv(files.Xd, data.times, data.Xd, "xd_");
  write_snapshot_csv(files.Xdd, data.times, data.Xdd, "xdd_");
  if (files.U && data.U) write_snapshot_csv(*files.U, data.times, *data.U, "u_");
  if (files.F && data.F) write_snapshot_csv(*files.F, data.times, *data.F, "f_");
}

TrajectoryDatad load_csv(const TrajectoryFiles& files) {
  auto x = read_snapshot_csv(files.X);
  auto check_times = [&](const SnapshotTable& other, const fs::path& path) {
    require(other.times.size() == x.times.size() && other.times == x.times,
            ErrorKind::kInvalidInput,
            "'" + path.string() + "' has a different time grid than '" +
                files.X.string() + "'");
  };
  TrajectoryDatad data;
  auto xd = read_snapshot_csv(files.Xd);
  check_times(xd, files.Xd);
  auto xdd = read_snapshot_csv(files.Xdd);
  check_times(xdd, files.Xdd);
  data.times = x.times;
  data.X = std::move(x.values);
  data.Xd = std::move(xd.values);
  data.Xdd = std::move(xdd.values);
  if (files.U) {
    auto u = read_snapshot_csv(*files.U);
    check_times(u, *files.U);
    data.U = std::move(u.values);
  }
  if (files.F) {
    auto f = read_snapshot_csv(*files.F);
    check_times(f, *files.F);
    data.F = std::move(f.values);
  }
  data.validate();
  return data;
}

// --- report tables -----------------------------------------------------------

void write_spectrum_csv(const fs::path& path, const VectorXd& sigma) {
  require(sigma.size() > 0 && sigma(0) > 0.0, ErrorKind::kDegenerateInput,
          "spectrum is empty or zero");
  std::string text = "index,sigma_ratio\n";
  for (Index i = 0; i < sigma.size(); ++i)
    text += std::to_string(i + 1) + "," + format_double(sigma(i) / sigma(0)) + "\n";
  write_text(path, text);
}

void write_lambda_table_csv(const fs::path& path,
                            const std::vector<LambdaCandidate<double>>& table) {
  std::string text = "lambda,train_residual,validation_error,operator_norm\n";
  for (const auto& row : table) {
    text += format_double(row.lambda) + "," + format_double(row.train_residual) +
            "," + format_double(row.validation_error) + "," +
            format_double(row.operator_norm) + "\n";
  }
  write_text(path, text);
}

void write_error_series_csv(const fs::path& path,
                            const ErrorSeries<double>& series) {
  require(series.times.size() == series.eps.size(), ErrorKind::kInvalidInput,
          "error series has no matching time grid");
  std::string text = "t,eps,phase\n";
  const double slack = 1e-9 * std::max(1.0, std::abs(series.phase_split));
  for (Index i = 0; i < series.eps.size(); ++i) {
    text += format_double(series.times(i)) + "," + format_double(series.eps(i)) +
            "," + (series.times(i) <= series.phase_split + slack ? "train" : "test") +
            "\n";
  }
  write_text(path, text);
}

void write_trace_csv(const fs::path& path,
                     const std::vector<TraceRow<double>>& trace) {
  std::string text = "iteration,objective,primal_residual,dual_residual\n";
  for (const auto& row : trace) {
    text += std::to_string(row.iteration) + "," + format_double(row.objective) +
            "," + format_double(row.primal_residual) + "," +
            format_double(row.dual_residual) + "\n";
  }
  write_text(path, text);
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  require(out.good(), ErrorKind::kInvalidInput,
          "failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  auto in = open_input(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace mechrom::io
