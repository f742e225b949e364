# Copyright 2026 The ulaudit Authors
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

"""Membership-inference audits of machine unlearning."""

from ulaudit._core import (
    ComputeError,
    ConfigError,
    DensityModel,
    IoError,
    UlauditError,
    attack_accuracy,
    canonical_config,
    compare_runs,
    config_hash,
    default_config_yaml,
    ks_two_sample,
    lambda_score,
    psi_score,
    roc_auc,
    run_audit,
    tpr_at_fpr,
)

__all__ = [
    "ComputeError",
    "ConfigError",
    "DensityModel",
    "IoError",
    "UlauditError",
    "attack_accuracy",
    "canonical_config",
    "compare_runs",
    "config_hash",
    "default_config_yaml",
    "ks_two_sample",
    "lambda_score",
    "psi_score",
    "roc_auc",
    "run_audit",
    "tpr_at_fpr",
]
