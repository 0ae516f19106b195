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

"""Reader for the detector dataset written by `sim export-dataset`."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tensor import read_tensor


@dataclass
class Dataset:
    inputs: np.ndarray  # [item, N, Na, 4M] complex
    targets: np.ndarray  # [item, |A|] one-hot
    map_pred: np.ndarray  # [item] receiver decision index, -1 if none
    items: list
    alphabet: np.ndarray

    def __len__(self):
        return len(self.items)


def load_split(root, split):
    root = Path(root)
    manifest = json.loads((root / "manifest.json").read_text())
    entry = manifest["splits"][split]
    _, x = read_tensor(root / entry["inputs"])
    _, y = read_tensor(root / entry["targets"])
    _, p = read_tensor(root / entry["map_pred"])
    n, N, Na, M = entry["count"], manifest["N"], manifest["Na"], manifest["M"]
    alphabet = np.array([complex(re, im) for re, im in manifest["alphabet"]])
    if x.shape != (n, N, Na, 4 * M) or y.shape != (n, len(alphabet)) or p.shape != (n,):
        raise ValueError(f"{split}: tensor shapes disagree with the manifest")
    return Dataset(x, y, p.astype(np.int64), entry["items"], alphabet)


def map_decision(probs, alphabet):
    """Symbol with the largest probability per row (first index on ties)."""
    return np.asarray(alphabet)[np.argmax(np.asarray(probs), axis=-1)]


def refine_channel(w_hat, t_hat):
    """h = w / t, elementwise; t must come from a zero-free alphabet."""
    t_hat = np.asarray(t_hat)
    if np.any(t_hat == 0):
        raise ValueError("zero symbol decision")
    return np.asarray(w_hat) / t_hat
