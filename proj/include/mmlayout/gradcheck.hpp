// Copyright 2026 The mmLayout Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

#include "mmlayout/config.hpp"
#include "mmlayout/document.hpp"
#include "mmlayout/optim.hpp"

namespace mmlayout {

// Labelled six-word page: "Date:" "January 5, 1989" / "Total:" "$12.50".
Page gradcheck_document();

// d=16, 4 heads, N=2, M=1, K=4, 3x3 patches. The larger init scale keeps
// every gradient well above the finite-difference noise floor.
ModelConfig gradcheck_config(std::uint64_t seed);

// Finite-difference check of the end-to-end loss over every parameter.
GradCheckResult run_model_grad_check(const ModelConfig& cfg, const Page& page, double h = 1e-5);

}  // namespace mmlayout
