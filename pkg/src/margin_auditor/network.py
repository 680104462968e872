"""Feedforward networks: dense layers composed with fixed nonlinearities.

A network is an ordered chain of layers, each a weight matrix (acting on
column vectors), a reference matrix of the same shape, and a nonlinearity.
Data flows through with examples as rows; evaluation is pure and
deterministic, so concurrent use is safe.
"""

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InputOutputError, ParameterError, ParseError
from .linalg import as_matrix, read_mat1, write_mat1


def _check_lipschitz_exponent(p):
    if not (p >= 1.0):
        raise ParameterError(f"Lipschitz exponent p must be >= 1, got {p!r}")


class Relu:
    """Coordinatewise max(0, z); 1-Lipschitz for every p-norm and maps 0 to 0."""

    kind = "relu"

    def apply(self, z):
        return np.maximum(z, 0.0)

    def lipschitz(self, p):
        _check_lipschitz_exponent(p)
        return 1.0

    def output_dim(self, input_dim):
        return input_dim

    def to_json(self):
        return {"kind": "relu"}

    def __eq__(self, other):
        return isinstance(other, Relu)


class Identity:
    """The identity map; 1-Lipschitz, maps 0 to 0."""

    kind = "identity"

    def apply(self, z):
        return z

    def lipschitz(self, p):
        _check_lipschitz_exponent(p)
        return 1.0

    def output_dim(self, input_dim):
        return input_dim

    def to_json(self):
        return {"kind": "identity"}

    def __eq__(self, other):
        return isinstance(other, Identity)


class MaxPool:
    """Coordinate-group max pooling.

    ``groups`` is a collection of index sets over the input coordinates; output
    coordinate i is the max of the input over groups[i].  The Lipschitz
    constant w.r.t. the p-norm is m**(1/p), where m is the largest number of
    groups any single input coordinate belongs to (m=1 for a partition).
    Maps 0 to 0.
    """

    kind = "maxpool"

    def __init__(self, groups):
        groups = tuple(tuple(int(i) for i in g) for g in groups)
        if not groups or any(not g for g in groups):
            raise ParameterError("maxpool needs at least one nonempty group")
        if any(i < 0 for g in groups for i in g):
            raise ParameterError("maxpool group indices must be nonnegative")
        self.groups = groups

    @property
    def multiplicity(self):
        counts = {}
        for g in self.groups:
            for i in set(g):
                counts[i] = counts.get(i, 0) + 1
        return max(counts.values())

    def apply(self, z):
        return np.stack([z[:, g].max(axis=1) for g in self.groups], axis=1)

    def lipschitz(self, p):
        _check_lipschitz_exponent(p)
        if math.isinf(p):
            return 1.0
        return float(self.multiplicity) ** (1.0 / p)

    def output_dim(self, input_dim):
        return len(self.groups)

    def to_json(self):
        return {"kind": "maxpool", "groups": [list(g) for g in self.groups]}

    def __eq__(self, other):
        return isinstance(other, MaxPool) and self.groups == other.groups


def lipschitz_constant(nonlinearity, p):
    """Lipschitz constant of a supported nonlinearity w.r.t. the p-norm."""
    return nonlinearity.lipschitz(p)


@dataclass(frozen=True)
class Layer:
    """One layer: weight A (out x in), reference M of the same shape, nonlinearity."""

    weight: np.ndarray
    nonlinearity: object
    reference: np.ndarray = None

    def __post_init__(self):
        w = as_matrix(self.weight)
        r = np.zeros_like(w) if self.reference is None else as_matrix(self.reference)
        if r.shape != w.shape:
            raise DimensionError(
                f"reference shape {r.shape} must equal weight shape {w.shape}"
            )
        if isinstance(self.nonlinearity, MaxPool):
            used = set()
            for g in self.nonlinearity.groups:
                used.update(g)
            if used != set(range(w.shape[0])):
                raise DimensionError(
                    f"maxpool groups must cover exactly the {w.shape[0]} output coordinates"
                )
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "reference", r)

    @property
    def output_dim(self):
        return self.nonlinearity.output_dim(self.weight.shape[0])

    @property
    def input_dim(self):
        return self.weight.shape[1]


@dataclass(frozen=True)
class Network:
    """Ordered layer chain with consistent dimensions."""

    layers: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ParameterError("a network needs at least one layer")
        for a, b in zip(layers, layers[1:]):
            if b.input_dim != a.output_dim:
                raise DimensionError(
                    f"layer input dim {b.input_dim} does not chain from previous output dim {a.output_dim}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self):
        return self.layers[0].input_dim

    @property
    def output_dim(self):
        return self.layers[-1].output_dim

    @property
    def width(self):
        dims = [self.input_dim]
        for layer in self.layers:
            dims.append(layer.weight.shape[0])
            dims.append(layer.output_dim)
        return max(dims)

    def forward(self, x):
        """Evaluate the network on examples given as rows of ``x``."""
        return self.forward_images(x)[-1]

    def forward_images(self, x):
        """Per-layer forward images (X_0, ..., X_L), examples as rows; X_0 is the input."""
        z = as_matrix(x)
        if z.shape[1] != self.input_dim:
            raise DimensionError(
                f"input has {z.shape[1]} columns, network expects {self.input_dim}"
            )
        images = [z]
        for layer in self.layers:
            z = layer.nonlinearity.apply(z @ layer.weight.T)
            images.append(z)
        return images


def _nonlinearity_from_json(obj):
    kind = obj.get("kind")
    if kind == "relu":
        return Relu()
    if kind == "identity":
        return Identity()
    if kind == "maxpool":
        return MaxPool(obj.get("groups", []))
    raise ParseError(f"unknown nonlinearity kind {kind!r}")


def load_manifest(path):
    """Load a network from a JSON manifest.

    The manifest lists layers in order; each entry has a ``weight`` path
    (MAT1), a ``reference`` that is a path or "zero" or "identity", and a
    ``nonlinearity`` object.  Paths are resolved relative to the manifest.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise InputOutputError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest is not valid JSON: {exc}", path=path) from None
    base = os.path.dirname(os.path.abspath(path))
    entries = doc.get("layers")
    if not isinstance(entries, list) or not entries:
        raise ParseError("manifest must contain a nonempty 'layers' list", path=path)
    layers = []
    for entry in entries:
        weight = read_mat1(os.path.join(base, entry["weight"]))
        ref_spec = entry.get("reference", "zero")
        if ref_spec == "zero":
            reference = np.zeros_like(weight)
        elif ref_spec == "identity":
            if weight.shape[0] != weight.shape[1]:
                raise ParseError(
                    f"identity reference needs a square weight, got {weight.shape}",
                    path=path,
                )
            reference = np.eye(weight.shape[0])
        else:
            reference = read_mat1(os.path.join(base, ref_spec))
        nl = _nonlinearity_from_json(entry.get("nonlinearity", {"kind": "relu"}))
        layers.append(Layer(weight=weight, nonlinearity=nl, reference=reference))
    return Network(layers=tuple(layers))


def save_manifest(net, directory, name="network"):
    """Write a network as MAT1 weight files plus a manifest JSON; returns the manifest path."""
    os.makedirs(directory, exist_ok=True)
    entries = []
    for idx, layer in enumerate(net.layers):
        wname = f"{name}_w{idx}.mat"
        write_mat1(os.path.join(directory, wname), layer.weight)
        if not layer.reference.any():
            ref = "zero"
        elif layer.weight.shape[0] == layer.weight.shape[1] and np.array_equal(
            layer.reference, np.eye(layer.weight.shape[0])
        ):
            ref = "identity"
        else:
            ref = f"{name}_m{idx}.mat"
            write_mat1(os.path.join(directory, ref), layer.reference)
        entries.append(
            {"weight": wname, "reference": ref, "nonlinearity": layer.nonlinearity.to_json()}
        )
    manifest_path = os.path.join(directory, f"{name}.json")
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump({"layers": entries}, f, indent=2)
        f.write("\n")
    return manifest_path
