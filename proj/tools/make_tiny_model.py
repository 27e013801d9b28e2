#!/usr/bin/env python3
"""Writes the bundled tiny face-recognition test model.

The network is a randomly initialised residual CNN (112x112x3 input, 64-d
embedding). It carries no identity knowledge; it only exists so the whole
pipeline can be exercised without downloading real recognition weights.

Usage: make_tiny_model.py [output_dir]   (default: tests/data)
"""

import json
import pathlib
import sys

import numpy as np
import onnx
from onnx import TensorProto, helper, numpy_helper

SEED = 20240611
EMBEDDING_DIM = 64


def he(rng, shape):
    fan_in = int(np.prod(shape[1:]))
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(np.float32)


def build(rng):
    inits = []

    def init(name, array):
        inits.append(numpy_helper.from_array(np.asarray(array, dtype=np.float32), name))
        return name

    def conv(name, x, cin, cout, stride, weight_name=None):
        w = init(weight_name or f"{name}.weight", he(rng, (cout, cin, 3, 3)))
        b = init(f"{name}.bias", rng.uniform(-0.05, 0.05, cout))
        return helper.make_node(
            "Conv", [x, w, b], [name], name=name,
            kernel_shape=[3, 3], strides=[stride, stride], pads=[1, 1, 1, 1])

    nodes = [
        conv("conv1", "input", 3, 8, 2, weight_name="w1"),
        helper.make_node(
            "BatchNormalization",
            ["conv1",
             init("bn1.scale", rng.uniform(0.8, 1.2, 8)),
             init("bn1.bias", rng.uniform(-0.1, 0.1, 8)),
             init("bn1.mean", rng.uniform(-0.1, 0.1, 8)),
             init("bn1.var", rng.uniform(0.5, 1.5, 8))],
            ["bn1"], name="bn1", epsilon=1e-5),
        helper.make_node("Relu", ["bn1"], ["relu1"], name="relu1"),
        conv("conv2", "relu1", 8, 16, 2),
        helper.make_node(
            "PRelu", ["conv2", init("prelu2.slope", rng.uniform(0.05, 0.3, (16, 1, 1)))],
            ["prelu2"], name="prelu2"),
        conv("conv3", "prelu2", 16, 32, 2),
        helper.make_node("Relu", ["conv3"], ["relu3"], name="relu3"),
        conv("conv4", "relu3", 32, 32, 1),
        helper.make_node("Add", ["relu3", "conv4"], ["block_out"], name="block_add"),
        helper.make_node("Relu", ["block_out"], ["relu4"], name="relu4"),
        helper.make_node(
            "MaxPool", ["relu4"], ["pool"], name="pool", kernel_shape=[2, 2], strides=[2, 2]),
        helper.make_node("GlobalAveragePool", ["pool"], ["gap"], name="gap"),
        helper.make_node(
            "Constant", [], ["flat_shape"], name="flat_shape",
            value=numpy_helper.from_array(np.array([1, -1], dtype=np.int64), "flat_shape")),
        helper.make_node("Reshape", ["gap", "flat_shape"], ["flat"], name="flatten"),
        helper.make_node(
            "Gemm",
            ["flat",
             init("fc.weight", he(rng, (EMBEDDING_DIM, 32))),
             init("fc.bias", rng.uniform(-0.05, 0.05, EMBEDDING_DIM))],
            ["embedding"], name="fc", transB=1),
    ]

    graph = helper.make_graph(
        nodes, "tiny_face",
        [helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 3, 112, 112])],
        [helper.make_tensor_value_info("embedding", TensorProto.FLOAT, [1, EMBEDDING_DIM])],
        initializer=inits)
    model = helper.make_model(
        graph, producer_name="froq-tiny-model", opset_imports=[helper.make_opsetid("", 13)])
    model.ir_version = 8
    model = onnx.shape_inference.infer_shapes(model)
    onnx.checker.check_model(model)
    return model


def main():
    out_dir = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
    out_dir.mkdir(parents=True, exist_ok=True)
    model = build(np.random.default_rng(SEED))
    model_path = out_dir / "tiny_face.onnx"
    model_path.write_bytes(model.SerializeToString(deterministic=True))

    manifest = {
        "input_height": 112,
        "input_width": 112,
        "channel_order": "RGB",
        "mean": [0.5, 0.5, 0.5],
        "std": [0.5, 0.5, 0.5],
        "embedding_output_name": "embedding",
    }
    (out_dir / "tiny_face.onnx.manifest").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {model_path} ({model_path.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
