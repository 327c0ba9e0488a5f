"""Model documents: one self-describing JSON text file per model.

Floats are written in shortest round-trip decimal form, so save and load
reproduce the exact binary parameters. Kernel blocks of KDE nodes are
stored inline by default, or as a relative CSV path plus the list of row
indices that formed the training block.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cpds import ConditionalKde, LinearGaussian
from .dataset import read_csv
from .errors import SchemaMismatch
from .graph import Dag, NodeType
from .model import SemiparametricBn

FORMAT_NAME = "semibn-model"
FORMAT_VERSION = 1


def _node_document(model: SemiparametricBn, node: int, kernel_ref) -> dict:
    cpd = model.cpds[node]
    if isinstance(cpd, LinearGaussian):
        return {
            "family": "lg",
            "intercept": cpd.intercept,
            "coefficients": [float(c) for c in cpd.coefs],
            "variance": cpd.variance,
        }
    doc = {
        "family": "ckde",
        "bandwidth": [[float(v) for v in row] for row in cpd.bandwidth],
    }
    if kernel_ref is None:
        doc["kernels"] = [[float(v) for v in row] for row in cpd.kernels]
    else:
        path, rows = kernel_ref
        doc["kernels_csv"] = {"path": str(path), "rows": [int(r) for r in rows]}
    return doc


def save_model(
    model: SemiparametricBn,
    path: str | Path,
    kernel_ref: tuple[str, np.ndarray] | None = None,
) -> None:
    """Write the model document.

    kernel_ref, when given, is (relative csv path, training row indices);
    KDE kernel blocks are then referenced instead of inlined, and the CSV
    must hold the full training table the model was fit on.
    """
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n_variables": model.n_nodes,
        "variables": list(model.names),
        "arcs": [
            [model.names[s], model.names[d]] for s, d in model.dag.arcs()
        ],
        "node_types": {
            model.names[i]: model.node_types[i].value for i in range(model.n_nodes)
        },
        "nodes": {
            model.names[i]: _node_document(model, i, kernel_ref)
            for i in range(model.n_nodes)
        },
    }
    with Path(path).open("w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaMismatch(message)


def load_model(path: str | Path) -> SemiparametricBn:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path}: not valid JSON: {exc}") from None
    _require(isinstance(doc, dict), f"{path}: document must be an object")
    _require(doc.get("format") == FORMAT_NAME, f"{path}: unknown format tag")
    _require(doc.get("version") == FORMAT_VERSION, f"{path}: unknown version")
    names = doc.get("variables")
    _require(
        isinstance(names, list) and names and len(set(names)) == len(names),
        f"{path}: bad variable list",
    )
    _require(doc.get("n_variables") == len(names), f"{path}: wrong n_variables")
    index = {name: i for i, name in enumerate(names)}
    dag = Dag(len(names))
    for pair in doc.get("arcs", []):
        _require(
            isinstance(pair, list) and len(pair) == 2 and all(p in index for p in pair),
            f"{path}: bad arc {pair}",
        )
        dag.add_arc(index[pair[0]], index[pair[1]])
    tags = doc.get("node_types", {})
    nodes = doc.get("nodes", {})
    _require(set(tags) == set(names), f"{path}: node_types must cover all variables")
    _require(set(nodes) == set(names), f"{path}: nodes must cover all variables")
    node_types = []
    cpds = []
    for i, name in enumerate(names):
        try:
            node_type = NodeType(tags[name])
        except ValueError:
            raise SchemaMismatch(f"{path}: unknown family tag {tags[name]!r}") from None
        node_types.append(node_type)
        cpds.append(_load_node(path, nodes[name], i, dag.parents(i), node_type))
    return SemiparametricBn(names, dag, node_types, cpds)


def _load_node(path: Path, doc: dict, node: int, parents, node_type: NodeType):
    _require(isinstance(doc, dict), f"{path}: node entry must be an object")
    _require(
        doc.get("family") == node_type.value,
        f"{path}: node family does not match its type tag",
    )
    if node_type is NodeType.LG:
        coefs = np.array(doc.get("coefficients", []), dtype=float)
        _require(
            coefs.shape == (len(parents),),
            f"{path}: coefficient count does not match parents",
        )
        variance = doc.get("variance")
        _require(
            isinstance(variance, (int, float)) and variance > 0,
            f"{path}: variance must be positive",
        )
        return LinearGaussian(
            node, tuple(parents), float(doc.get("intercept", 0.0)), coefs, variance
        )
    bandwidth = np.array(doc.get("bandwidth", []), dtype=float)
    width = len(parents) + 1
    _require(
        bandwidth.shape == (width, width),
        f"{path}: bandwidth shape does not match parents",
    )
    if "kernels" in doc:
        kernels = np.array(doc["kernels"], dtype=float)
    elif "kernels_csv" in doc:
        ref = doc["kernels_csv"]
        _require(
            isinstance(ref, dict) and "path" in ref and "rows" in ref,
            f"{path}: kernels_csv needs path and rows",
        )
        table = read_csv(path.parent / ref["path"])
        rows = np.asarray(ref["rows"], dtype=int)
        kernels = table.values[rows][:, (node,) + tuple(parents)]
    else:
        raise SchemaMismatch(f"{path}: KDE node needs kernels or kernels_csv")
    _require(
        kernels.ndim == 2 and kernels.shape[1] == width,
        f"{path}: kernel block width does not match parents",
    )
    return ConditionalKde(node, tuple(parents), kernels, bandwidth)
