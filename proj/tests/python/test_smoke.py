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

import math

import pytest

import ulaudit


def test_auc_and_tpr():
    scores = [0.1, 0.4, 0.35, 0.8]
    truths = [False, False, True, True]
    assert ulaudit.roc_auc(scores, truths) == pytest.approx(0.75)
    assert ulaudit.attack_accuracy(scores, truths) == pytest.approx(0.75)
    assert ulaudit.tpr_at_fpr(scores, truths, 0.0) == pytest.approx(0.5)


def test_ks_exact():
    stat, p = ulaudit.ks_two_sample([1, 2, 3], [4, 5, 6])
    assert stat == 1.0
    assert p == pytest.approx(0.1)


def test_density_and_ratios():
    d = ulaudit.DensityModel([0.0], bandwidth=1.0)
    assert d.density(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    a = ulaudit.DensityModel([0.1, 0.5, 0.9])
    assert ulaudit.lambda_score(0.3, a, a) == 0.0
    far = ulaudit.DensityModel([10.0, 11.0], bandwidth=0.1)
    assert ulaudit.psi_score(0.5, a, far) > 10


def test_config_round_trip():
    template = ulaudit.default_config_yaml()
    assert ulaudit.config_hash(template) == ulaudit.config_hash("")
    assert ulaudit.config_hash("seed: 2") != ulaudit.config_hash("")


def test_errors_are_typed():
    with pytest.raises(ulaudit.ConfigError, match="shadows.count"):
        ulaudit.config_hash("shadows: {count: 7}")
    with pytest.raises(ulaudit.UlauditError):
        ulaudit.roc_auc([0.1], [True])
    with pytest.raises(ulaudit.IoError):
        ulaudit.compare_runs(["/nonexistent/run"])


def test_small_audit(tmp_path):
    yaml = f"""
seed: 1
output_dir: {tmp_path / "run"}
dataset: {{num_samples: 300}}
model: {{hidden_dim: 4}}
train: {{epochs: 20, batch_size: 64, learning_rate: 0.1}}
pre_attack: {{always: false}}
targets: {{mode: random, total: 30}}
shadows: {{count: 6}}
unlearn: {{method: retrain}}
"""
    rows = ulaudit.run_audit(yaml, jobs=2)
    attacks = {(r["attack"], r["subset"]) for r in rows}
    assert ("lambda", "all") in attacks
    for r in rows:
        assert 0.0 <= r["auc"] <= 1.0
        assert len(r["tpr_at_fpr"]) == 2
    table = ulaudit.compare_runs([str(tmp_path / "run")])
    assert table.startswith("attack,subset,metric,retrain:")
