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

"""OTFS grant-free random access: tensor container, dataset reader, core bindings."""

from .tensor import read_tensor, write_tensor
from .dataset import Dataset, load_split, map_decision, refine_channel

try:
    from . import _core
except ImportError:  # pure-Python pieces still work without the extension
    _core = None

__all__ = [
    "Dataset",
    "load_split",
    "map_decision",
    "read_tensor",
    "refine_channel",
    "write_tensor",
    "_core",
]
