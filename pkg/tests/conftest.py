import json
import math
import struct

import numpy as np
import pytest


def emb1_bytes(matrix):
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    rows, cols = matrix.shape
    return struct.pack("<4sII", b"EMB1", rows, cols) + matrix.tobytes()


def write_corpus(tmp_path, matrix, labels=None, prefix="corpus"):
    """Write a JSONL+EMB1 pair into tmp_path and return the two paths."""
    matrix = np.asarray(matrix, dtype="<f4")
    n = matrix.shape[0]
    labels = labels if labels is not None else [True] * n
    meta = tmp_path / f"{prefix}.jsonl"
    emb = tmp_path / f"{prefix}.emb1"
    lines = [
        json.dumps(
            {"id": f"r{i}", "prompt": f"prompt {i}", "completion": f"completion {i}",
             "label": bool(labels[i])}
        )
        for i in range(n)
    ]
    meta.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    emb.write_bytes(emb1_bytes(matrix))
    return meta, emb


@pytest.fixture
def worked_corpus(tmp_path):
    """Three 1-d points whose log-likelihoods under the unit model are
    evenly spaced: norm_ll = [0, 1, 0.5], the worked scoring chain.

    Under mix=0.5, means 0, variances 1 the mixture collapses to a standard
    normal, so l(x) = -x^2/2 - log(2*pi)/2. The x values 3, 1, sqrt(5)
    (rounded to binary32) give l = [-5.419, -1.419, -3.419]: shifted from
    the canonical [-5, -1, -3] chain by a constant, which min-max absorbs.
    """
    matrix = np.array([[3.0], [1.0], [math.sqrt(5.0)]], dtype="<f4")
    meta, emb = write_corpus(tmp_path, matrix, prefix="worked")
    model_path = tmp_path / "unit_model.json"
    model_path.write_text(
        json.dumps({"mix": 0.5, "mean1": [0.0], "mean2": [0.0], "var1": [1.0], "var2": [1.0]})
    )
    return meta, emb, model_path
