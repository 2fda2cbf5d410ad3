#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mechrom/copinf.hpp"
#include "mechrom/eval.hpp"
#include "mechrom/model.hpp"
#include "mechrom/opinf.hpp"
#include "mechrom/snapshots.hpp"

namespace mechrom::io {

namespace fs = std::filesystem;

/// Shortest-safe text form with 17 significant digits.
std::string format_double(double value);

enum class Symmetry { kAuto, kGeneral, kSymmetric };

/// Coordinate text format:
///   %%matrix coordinate real general|symmetric
///   rows cols nnz
///   row col value      (1-based; symmetric files hold the lower triangle)
/// Lines starting with '%' after the header are comments. The
/// "%%MatrixMarket matrix coordinate real ..." banner is accepted as well.
MatrixXd read_matrix_market(const fs::path& path);
void write_matrix_market(const fs::path& path, const MatrixXd& matrix,
                         Symmetry symmetry = Symmetry::kAuto);

struct SystemFiles {
  fs::path mass;
  fs::path damping;
  fs::path stiffness;
  fs::path input;

  static SystemFiles in(const fs::path& directory);
};

SecondOrderSystemd load_system(const SystemFiles& files);
void save_system(const SecondOrderSystemd& system, const SystemFiles& files);

/// One snapshot per row: header "t,<prefix>1,...,<prefix>k".
struct SnapshotTable {
  VectorXd times;
  MatrixXd values;  // k x N, one column per snapshot
};

SnapshotTable read_snapshot_csv(const fs::path& path);
void write_snapshot_csv(const fs::path& path, const VectorXd& times,
                        const MatrixXd& values, const std::string& prefix);

struct TrajectoryFiles {
  fs::path X;
  fs::path Xd;
  fs::path Xdd;
  std::optional<fs::path> U;
  std::optional<fs::path> F;

  /// X.csv, Xd.csv, Xdd.csv, U.csv, F.csv under `directory`; U and F are
  /// included only when `with_input` / `with_force` are set.
  static TrajectoryFiles in(const fs::path& directory, bool with_input = true,
                            bool with_force = true);
};

void save_csv(const TrajectoryDatad& data, const TrajectoryFiles& files);
TrajectoryDatad load_csv(const TrajectoryFiles& files);

/// Two columns: 1-based index, sigma_i / sigma_1.
void write_spectrum_csv(const fs::path& path, const VectorXd& sigma);
void write_lambda_table_csv(const fs::path& path,
                            const std::vector<LambdaCandidate<double>>& table);
void write_error_series_csv(const fs::path& path,
                            const ErrorSeries<double>& series);
void write_trace_csv(const fs::path& path,
                     const std::vector<TraceRow<double>>& trace);

/// Writes `text` to `path`, creating parent directories.
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace mechrom::io
