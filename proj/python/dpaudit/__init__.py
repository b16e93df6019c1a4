# Copyright 2026 The dpaudit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python bindings for the dpaudit C++ library."""

from dpaudit._dpaudit import (
    audit_epsilon,
    audit_epsilon_held_out,
    clopper_pearson_upper,
    compose_gaussian_gdp,
    error_rates_to_mu,
    gdp_to_delta,
    gdp_to_eps,
    gdp_tradeoff,
    run_audit,
    simulate_hidden,
)

__all__ = [
    "audit_epsilon",
    "audit_epsilon_held_out",
    "clopper_pearson_upper",
    "compose_gaussian_gdp",
    "error_rates_to_mu",
    "gdp_to_delta",
    "gdp_to_eps",
    "gdp_tradeoff",
    "run_audit",
    "simulate_hidden",
]
