# Copyright 2026 The otfsra Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import os
import subprocess
from pathlib import Path

import numpy as np
import pytest

import otfsra
from otfsra import load_split, map_decision, read_tensor, refine_channel, write_tensor

SIM = os.environ.get("OTFSRA_SIM")
TINY = [
    "system.U=3", "system.M=4", "system.N=2", "system.Nz=2", "system.Ny=1",
    "system.Q=4", "system.P=1", "system.p_lambda=1", "system.snr_db=20",
    "system.tau_max=2.5e-5", "algo.I_out=30",
]


def test_tensor_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    z = rng.normal(size=(2, 3, 4)) + 1j * rng.normal(size=(2, 3, 4))
    write_tensor(tmp_path / "z.tensor", "z", z)
    name, back = read_tensor(tmp_path / "z.tensor")
    assert name == "z"
    assert back.dtype == np.complex128
    np.testing.assert_array_equal(back, z)
    write_tensor(tmp_path / "r.tensor", "r", np.arange(5.0))
    assert read_tensor(tmp_path / "r.tensor")[1].tolist() == [0, 1, 2, 3, 4]


def test_tensor_rejects_truncated_payload(tmp_path):
    write_tensor(tmp_path / "t.tensor", "t", np.ones(4))
    data = (tmp_path / "t.tensor").read_bytes()
    (tmp_path / "t.tensor").write_bytes(data[:-8])
    with pytest.raises(ValueError):
        read_tensor(tmp_path / "t.tensor")


def test_decision_and_refinement():
    alphabet = np.array([-3, -1, 1, 3]) / np.sqrt(5)
    probs = np.array([[0.1, 0.2, 0.4, 0.3], [0, 0, 0, 1]])
    t = map_decision(probs, alphabet)
    np.testing.assert_array_equal(t, alphabet[[2, 3]])
    h = np.array([0.5 + 1j, -2j])
    np.testing.assert_allclose(refine_channel(h * t, t), h, rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        refine_channel(h, [0, 1])


@pytest.mark.skipif(otfsra._core is None, reason="extension not built")
def test_bound_trial_is_deterministic():
    a = otfsra._core.run_trial(overrides=TINY, seed=4)
    b = otfsra._core.run_trial(overrides=TINY, seed=4)
    assert a["iterations"] == b["iterations"]
    np.testing.assert_array_equal(a["h_hat"], b["h_hat"])
    assert a["H"].shape == (4, 3 * 4 * 2, 2)
    assert 0.0 <= a["aer"] <= 1.0
    with pytest.raises(ValueError):
        otfsra._core.run_trial(overrides=["system.U=0"])


@pytest.mark.skipif(otfsra._core is None, reason="extension not built")
def test_oracle_check_binding():
    assert otfsra._core.oracle_check(seed=3, count=2) < 1e-9


@pytest.mark.skipif(not SIM, reason="OTFSRA_SIM not set")
def test_dataset_from_cli(tmp_path):
    args = sum((["--override", o] for o in TINY), [])
    for seed in (1, 2, 3):
        subprocess.run([SIM, "trial", *args, "--seed", str(seed), "--out", str(tmp_path / "rec" / str(seed))],
                       check=True, capture_output=True)
    man = json.loads((tmp_path / "rec" / "1" / "manifest.json").read_text())
    assert {t["name"] for t in man["tensors"]} >= {"w_hat", "tau_w_post", "h_hat", "tau_h_post", "activity_hat"}
    name, w = read_tensor(tmp_path / "rec" / "1" / "w_hat.tensor")
    assert name == "w_hat" and w.shape == (4, 24, 2)

    subprocess.run([SIM, "export-dataset", str(tmp_path / "rec"), "--out", str(tmp_path / "ds")],
                   check=True, capture_output=True)
    total = 0
    for split in ("train", "val", "test"):
        ds = load_split(tmp_path / "ds", split)
        total += len(ds)
        assert ds.inputs.shape[1:] == (2, 2, 16)
        if len(ds):
            np.testing.assert_array_equal(ds.targets.sum(axis=1), 1.0)
            var = ds.inputs[..., 4:8]
            assert np.all(var.real >= 0) and np.all(var.imag == 0)
    assert total % 4 == 0
