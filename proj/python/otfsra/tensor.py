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

"""Binary tensor container shared with the C++ core.

One JSON header line {"name", "dtype", "shape"}, then the row-major payload as
little-endian float64, with complex values stored as interleaved (re, im).
"""

import json
from pathlib import Path

import numpy as np

_DTYPES = {"complex128": np.dtype("<c16"), "float64": np.dtype("<f8")}


def write_tensor(path, name, array):
    arr = np.asarray(array)
    dtype = "complex128" if np.iscomplexobj(arr) else "float64"
    arr = np.ascontiguousarray(arr, dtype=_DTYPES[dtype])
    header = json.dumps({"name": name, "dtype": dtype, "shape": list(arr.shape)})
    with open(path, "wb") as f:
        f.write(header.encode() + b"\n")
        f.write(arr.tobytes())


def read_tensor(path):
    """Returns (name, array)."""
    raw = Path(path).read_bytes()
    cut = raw.find(b"\n")
    if cut < 0:
        raise ValueError(f"{path}: missing header line")
    try:
        head = json.loads(raw[:cut])
        dtype = _DTYPES[head["dtype"]]
        shape = tuple(int(s) for s in head["shape"])
    except (ValueError, KeyError, TypeError) as e:
        raise ValueError(f"{path}: bad header ({e})") from None
    body = raw[cut + 1:]
    count = int(np.prod(shape, dtype=np.int64))
    if len(body) != count * dtype.itemsize:
        raise ValueError(f"{path}: payload has {len(body)} bytes, shape {shape} needs {count * dtype.itemsize}")
    return head["name"], np.frombuffer(body, dtype=dtype).reshape(shape).copy()
