#pragma once

#include "mechrom/copinf.hpp"
#include "mechrom/errors.hpp"
#include "mechrom/eval.hpp"
#include "mechrom/model.hpp"
#include "mechrom/newmark.hpp"
#include "mechrom/opinf.hpp"
#include "mechrom/pod.hpp"
#include "mechrom/rom.hpp"
#include "mechrom/snapshots.hpp"
#include "mechrom/types.hpp"
