# Copyright 2026 The mlsreenact Authors.
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

"""Regenerates source.png, a 256x256 RGB test pattern.

Gradients plus a checkerboard and a disc, so any misplaced pixel shows.
The golden output is produced by the mlsr binary, not by this script.
"""

import numpy as np
from PIL import Image

SIDE = 256

y, x = np.mgrid[0:SIDE, 0:SIDE].astype(np.float64)
r = x / (SIDE - 1)
g = y / (SIDE - 1)
checker = ((x // 32 + y // 32) % 2).astype(np.float64)
b = 0.25 + 0.5 * checker
disc = (x - 160) ** 2 + (y - 96) ** 2 < 40 ** 2
r[disc], g[disc], b[disc] = 1.0, 0.9, 0.1
rgb = np.stack([r, g, b], axis=-1)
Image.fromarray(np.round(rgb * 255).astype(np.uint8), "RGB").save("source.png")
