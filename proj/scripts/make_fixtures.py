#!/usr/bin/env python3
# Copyright 2026 The Compass Authors.
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
"""Regenerates the frozen fixtures under data/fixtures.

The synthetic 8x8 dataset and the two reference models are repository
fixtures: the C++ toolkit never trains anything. Run this script only when
the fixtures must be rebuilt; every pinned golden value in the test suite
depends on the bytes it writes.

    python3 scripts/make_fixtures.py data/fixtures
"""

import json
import os
import struct
import sys

import numpy as np
import torch
from torch import nn

SIDE = 8
CLASSES = 4
SEED = 42


def draw_sample(rng, label):
    img = np.zeros((SIDE, SIDE), dtype=np.float64)
    amp = rng.uniform(0.55, 1.0)
    if label == 0:  # horizontal bar
        r = rng.integers(1, SIDE - 1)
        c = rng.integers(0, 3)
        img[r, c:c + rng.integers(4, 7)] = amp
    elif label == 1:  # vertical bar
        c = rng.integers(1, SIDE - 1)
        r = rng.integers(0, 3)
        img[r:r + rng.integers(4, 7), c] = amp
    elif label == 2:  # diagonal stroke
        length = rng.integers(4, 7)
        r = rng.integers(0, SIDE - length + 1)
        c = rng.integers(0, SIDE - length + 1)
        for k in range(length):
            img[r + k, c + k] = amp
    else:  # hollow square
        s = rng.integers(3, 5)
        r = rng.integers(0, SIDE - s + 1)
        c = rng.integers(0, SIDE - s + 1)
        img[r, c:c + s] = amp
        img[r + s - 1, c:c + s] = amp
        img[r:r + s, c] = amp
        img[r:r + s, c + s - 1] = amp
    img += rng.normal(0.0, 0.22, size=img.shape)
    # a few bright distractor pixels
    for _ in range(rng.integers(0, 4)):
        img[rng.integers(0, SIDE), rng.integers(0, SIDE)] = rng.uniform(0.5, 1.0)
    return np.clip(img, 0.0, 1.0)


def make_split(rng, n):
    labels = np.array([i % CLASSES for i in range(n)], dtype=np.uint32)
    rng.shuffle(labels)
    data = np.stack([draw_sample(rng, int(y)) for y in labels])
    return data.astype(np.float32).reshape(n, 1, SIDE, SIDE), labels


def write_dataset(path, data, labels):
    os.makedirs(path, exist_ok=True)
    manifest = {
        "format_version": 1,
        "n": int(len(labels)),
        "input_shape": [1, SIDE, SIDE],
        "num_classes": CLASSES,
    }
    with open(os.path.join(path, "manifest"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    with open(os.path.join(path, "data.bin"), "wb") as f:
        f.write(data.astype("<f4").tobytes())
    with open(os.path.join(path, "labels.bin"), "wb") as f:
        f.write(labels.astype("<u4").tobytes())


def export_model(path, name, net, layers):
    """layers: list of (layer-json, torch-module-or-None)."""
    os.makedirs(path, exist_ok=True)
    blobs = []
    params = []
    spec = []
    for idx, (entry, module) in enumerate(layers):
        spec.append(entry)
        if module is None:
            continue
        w = module.weight.detach().numpy().astype(np.float64)
        b = module.bias.detach().numpy().astype(np.float64)
        if entry["kind"] == "dense":
            w = w.T  # stored as [in, out]
        params.append({"layer": idx, "name": "weight", "shape": list(w.shape)})
        params.append({"layer": idx, "name": "bias", "shape": list(b.shape)})
        blobs += [w.astype("<f4").tobytes(), b.astype("<f4").tobytes()]
    count = sum(int(np.prod(p["shape"])) for p in params)
    manifest = {
        "format_version": 1,
        "name": name,
        "num_classes": CLASSES,
        "input_shape": [1, SIDE, SIDE],
        "layers": spec,
        "params": params,
        "param_count": count,
    }
    with open(os.path.join(path, "manifest"), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    with open(os.path.join(path, "weights.bin"), "wb") as f:
        for blob in blobs:
            f.write(blob)


def train(net, x, y, epochs=400):
    opt = torch.optim.Adam(net.parameters(), lr=0.01)
    loss_fn = nn.CrossEntropyLoss()
    for _ in range(epochs):
        opt.zero_grad()
        loss = loss_fn(net(x), y)
        loss.backward()
        opt.step()
    with torch.no_grad():
        return (net(x).argmax(1) == y).double().mean().item()


def main(out):
    rng = np.random.default_rng(SEED)
    train_x, train_y = make_split(rng, 400)
    test_x, test_y = make_split(rng, 200)
    write_dataset(os.path.join(out, "synth8x8_train"), train_x, train_y)
    write_dataset(os.path.join(out, "synth8x8_test"), test_x, test_y)

    torch.manual_seed(SEED)
    x = torch.tensor(train_x, dtype=torch.float64)
    y = torch.tensor(train_y.astype(np.int64))

    mlp_hidden = nn.Linear(64, 32).double()
    mlp_out = nn.Linear(32, CLASSES).double()
    mlp = nn.Sequential(nn.Flatten(), mlp_hidden, nn.ReLU(), mlp_out)
    acc = train(mlp, x, y, epochs=150)
    print("tiny-mlp train accuracy", acc)
    export_model(os.path.join(out, "tiny_mlp.model"), "tiny-mlp", mlp, [
        ({"kind": "flatten"}, None),
        ({"kind": "dense", "in": 64, "out": 32}, mlp_hidden),
        ({"kind": "relu"}, None),
        ({"kind": "dense", "in": 32, "out": CLASSES}, mlp_out),
    ])

    conv = nn.Conv2d(1, 4, 3, padding=1).double()
    cnn_hidden = nn.Linear(64, 16).double()
    cnn_out = nn.Linear(16, CLASSES).double()
    cnn = nn.Sequential(conv, nn.ReLU(), nn.MaxPool2d(2), nn.Flatten(),
                        cnn_hidden, nn.ReLU(), cnn_out)
    acc = train(cnn, x, y, epochs=400)
    print("tiny-cnn train accuracy", acc)
    export_model(os.path.join(out, "tiny_cnn.model"), "tiny-cnn", cnn, [
        ({"kind": "conv2d", "in_channels": 1, "out_channels": 4,
          "kernel": [3, 3], "padding": 1}, conv),
        ({"kind": "relu"}, None),
        ({"kind": "max-pool2d", "size": 2}, None),
        ({"kind": "flatten"}, None),
        ({"kind": "dense", "in": 64, "out": 16}, cnn_hidden),
        ({"kind": "relu"}, None),
        ({"kind": "dense", "in": 16, "out": CLASSES}, cnn_out),
    ])

    tx = torch.tensor(test_x, dtype=torch.float64)
    with torch.no_grad():
        pm = mlp(tx).argmax(1).numpy()
        pc = cnn(tx).argmax(1).numpy()
    print("test accuracy mlp", (pm == test_y).mean(), "cnn", (pc == test_y).mean())
    print("test disagreements", int((pm != pc).sum()))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/fixtures")
