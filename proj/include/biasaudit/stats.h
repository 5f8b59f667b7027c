// Copyright 2026 The biasaudit Authors.
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

#ifndef BIASAUDIT_STATS_H_
#define BIASAUDIT_STATS_H_

#include <span>

namespace biasaudit {

// I_x(a, b) via the Lentz continued fraction; a, b > 0, x in [0, 1].
double RegularizedIncompleteBeta(double a, double b, double x);

// P(T <= t) for Student's t with `df` > 0 degrees of freedom.
double StudentTCdf(double t, double df);

// P(|T| >= |t|).
double StudentTTwoSidedP(double t, double df);

// Population standard deviation (divides by n). Throws kEmptyInput.
double PopulationStd(std::span<const double> values);

// Order statistic at (n - 1) / 2 of the sorted values. Throws kEmptyInput.
double LowerMedian(std::span<const double> values);

}  // namespace biasaudit

#endif  // BIASAUDIT_STATS_H_
