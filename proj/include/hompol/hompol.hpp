#pragma once

#include "hompol/closedform.hpp"
#include "hompol/dataset_io.hpp"
#include "hompol/error.hpp"
#include "hompol/estimation.hpp"
#include "hompol/experiment.hpp"
#include "hompol/optics.hpp"
#include "hompol/oracle.hpp"
#include "hompol/outcome.hpp"
#include "hompol/wavepacket.hpp"

namespace hompol {

inline constexpr const char *kVersion = "0.1.0";

} // namespace hompol
