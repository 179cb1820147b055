// Copyright 2026 The catfb Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CATFB_VERSION_HPP
#define CATFB_VERSION_HPP

#define CATFB_VERSION_MAJOR 0
#define CATFB_VERSION_MINOR 1
#define CATFB_VERSION_PATCH 0
#define CATFB_VERSION_STRING "0.1.0"

#endif  // CATFB_VERSION_HPP
