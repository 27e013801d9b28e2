#!/usr/bin/env python3
"""Dumps reference intermediate tensors of a model using onnxruntime.

Every computed value (excluding Constant nodes) is promoted to a graph output,
the model is run on a deterministic probe input, and the results are written to
a small binary file the C++ tests compare against:

    magic "FROQREF1"
    u32 input_count
    per input:  u32 entry_count
                per entry: u32 name_len, name, u32 rank, i64 dims[rank], f32 data[]

A graph listing (`<model>.graph.json`) with the eligible tap names in node
order is written alongside, computed straight from the protobuf.

Usage: dump_reference.py model.onnx embedding_output_name out_prefix
"""

import json
import struct
import sys

import numpy as np
import onnx
import onnxruntime as ort


def probe_input(kind, shape):
    count = int(np.prod(shape))
    index = np.arange(count, dtype=np.int64)
    if kind == 0:
        values = ((index * 37) % 256) / 127.5 - 1.0
    else:
        values = ((index * 101 + 13) % 199) / 99.0 - 1.0
    return values.astype(np.float32).reshape(shape)


def eligible_taps(model, embedding_name):
    graph = model.graph
    initializers = {t.name for t in graph.initializer}
    input_dependent = {i.name for i in graph.input if i.name not in initializers}
    taps = []
    for node in graph.node:
        depends = any(name in input_dependent for name in node.input)
        for out in node.output:
            if not out:
                continue
            if node.op_type != "Constant" and depends:
                input_dependent.add(out)
                if out != embedding_name:
                    taps.append(out)
    return taps, sorted(initializers)


def main():
    model_path, embedding_name, prefix = sys.argv[1:4]
    model = onnx.load(model_path)
    taps, initializers = eligible_taps(model, embedding_name)

    with open(prefix + ".graph.json", "w") as f:
        json.dump({"taps": taps, "initializers": initializers,
                   "node_count": len(model.graph.node)}, f, indent=2)
        f.write("\n")

    existing = {o.name for o in model.graph.output}
    for name in taps:
        if name not in existing:
            model.graph.output.append(onnx.ValueInfoProto(name=name))
    opts = ort.SessionOptions()
    opts.graph_optimization_level = ort.GraphOptimizationLevel.ORT_DISABLE_ALL
    session = ort.InferenceSession(model.SerializeToString(), opts,
                                   providers=["CPUExecutionProvider"])
    inp = session.get_inputs()[0]
    shape = [d if isinstance(d, int) else 1 for d in inp.shape]
    names = [embedding_name] + taps

    with open(prefix + ".reference.bin", "wb") as f:
        f.write(b"FROQREF1")
        f.write(struct.pack("<I", 1))
        for kind in (0,):
            outputs = session.run(names, {inp.name: probe_input(kind, shape)})
            f.write(struct.pack("<I", len(names)))
            for name, value in zip(names, outputs):
                value = np.ascontiguousarray(value, dtype="<f4")
                encoded = name.encode()
                f.write(struct.pack("<I", len(encoded)))
                f.write(encoded)
                f.write(struct.pack("<I", value.ndim))
                f.write(struct.pack(f"<{value.ndim}q", *value.shape))
                f.write(value.tobytes())
    print(f"dumped {len(names)} tensors to {prefix}.reference.bin")


if __name__ == "__main__":
    main()
