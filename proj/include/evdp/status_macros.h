//
// Copyright 2026 The evdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef EVDP_STATUS_MACROS_H_
#define EVDP_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define EVDP_CONCAT_INNER_(a, b) a##b
#define EVDP_CONCAT_(a, b) EVDP_CONCAT_INNER_(a, b)

// Returns early with the status if `expr` is not OK.
#define RETURN_IF_ERROR(expr)                          \
  do {                                                 \
    const absl::Status evdp_status_ = (expr);          \
    if (!evdp_status_.ok()) return evdp_status_;       \
  } while (false)

#define EVDP_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                                \
  if (!tmp.ok()) return tmp.status();               \
  lhs = std::move(tmp).value()

// Evaluates `expr` (an absl::StatusOr<T>), returning its status on error and
// otherwise move-assigning the value into `lhs`.
#define ASSIGN_OR_RETURN(lhs, expr) \
  EVDP_ASSIGN_OR_RETURN_IMPL_(EVDP_CONCAT_(evdp_statusor_, __LINE__), lhs, expr)

#endif  // EVDP_STATUS_MACROS_H_
