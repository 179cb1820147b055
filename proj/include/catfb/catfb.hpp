// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header: the full public surface of the library.

#ifndef CATFB_CATFB_HPP
#define CATFB_CATFB_HPP

#include "catfb/adiabatic.hpp"
#include "catfb/analysis.hpp"
#include "catfb/channels.hpp"
#include "catfb/config.hpp"
#include "catfb/errors.hpp"
#include "catfb/feedback.hpp"
#include "catfb/fock.hpp"
#include "catfb/oracle.hpp"
#include "catfb/runner.hpp"
#include "catfb/version.hpp"

#endif  // CATFB_CATFB_HPP
