"""Device description, 1D mesh generation and doping/permittivity profiles.

A device is an ordered stack of layers, substrate side first. Stacks load
from JSON (schema below); the bundled ``device_fig1a.json`` is the golden
reference input used throughout the test suite.

JSON schema::

    {
      "name": str (optional),
      "temperature_K": number,
      "layers": [
        {"material": str, "thickness_nm": number > 0,
         "donor_cm3": number >= 0, "acceptor_cm3": number >= 0,
         "label": str (optional)},
        ...
      ]
    }

Meshes place a node exactly on every layer boundary; spacing is at most
``fine_spacing`` within ``refine_width`` of any boundary (including the two
device ends) and at most ``max_spacing`` elsewhere. Construction is pure
arithmetic on the layer table, so repeated builds are byte-identical and
halving the spacings never moves boundary nodes.

Profile conventions: quantities are piecewise constant per layer. Node
arrays sample them with a substrate-side tie-break for doping at interface
nodes and an adjacent-layer average for permittivity; the element arrays
(one value per mesh interval, taken from the layer containing the interval)
are the authoritative accounting, and integrate to the exact layer sheet
densities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from importlib import resources

import numpy as np

from .materials import lookup_material, UnknownMaterialError

DOPED_CONTACT_THRESHOLD = 1.0e17  # cm^-3; layers at or above count as contacts


class SchemaError(ValueError):
    """Raised for malformed device configuration documents."""


class MeshOptionError(ValueError):
    """Raised for invalid mesh spacing options."""


class ProfileConsistencyError(ValueError):
    """Raised when a mesh does not belong to the given stack."""


@dataclass(frozen=True)
class Layer:
    material: str
    thickness_nm: float
    donor_cm3: float = 0.0
    acceptor_cm3: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.thickness_nm <= 0:
            raise ValueError("layer thickness must be positive")
        if self.donor_cm3 < 0 or self.acceptor_cm3 < 0:
            raise ValueError("doping densities must be non-negative")


@dataclass(frozen=True)
class LayerStack:
    layers: tuple[Layer, ...]
    temperature: float = 300.0
    name: str = ""

    def __post_init__(self):
        if not self.layers:
            raise ValueError("layer stack must contain at least one layer")

    @property
    def total_thickness_nm(self):
        return float(sum(l.thickness_nm for l in self.layers))

    def boundaries_nm(self):
        """Positions of all layer boundaries, ends included (len = n_layers+1)."""
        edges = np.concatenate([[0.0], np.cumsum([l.thickness_nm for l in self.layers])])
        return edges

    def contact_layer_indices(self, threshold=DOPED_CONTACT_THRESHOLD):
        """Index ranges of the two contacts: the contiguous doped block at
        each end of the stack (doped means total doping >= threshold)."""
        doped = [l.donor_cm3 + l.acceptor_cm3 >= threshold for l in self.layers]
        if not any(doped):
            return None
        first = doped.index(True)
        last = len(doped) - 1 - doped[::-1].index(True)
        bottom_end = first
        while bottom_end + 1 < len(doped) and doped[bottom_end + 1]:
            bottom_end += 1
        top_start = last
        while top_start - 1 >= 0 and doped[top_start - 1]:
            top_start -= 1
        return bottom_end, top_start

    def intrinsic_thickness_nm(self, threshold=DOPED_CONTACT_THRESHOLD):
        """Total thickness between the doped contact blocks (None if undoped)."""
        contacts = self.contact_layer_indices(threshold)
        if contacts is None:
            return None
        bottom_end, top_start = contacts
        if top_start <= bottom_end:
            return 0.0
        return float(sum(l.thickness_nm for l in self.layers[bottom_end + 1:top_start]))


def parse_stack(source):
    """Build a validated LayerStack from a JSON document.

    `source` may be a JSON string, a dict, or a path to a JSON file.
    Schema violations raise SchemaError naming the offending layer index.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            with open(text, "r") as fh:
                text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from exc

    if "layers" not in doc or not isinstance(doc["layers"], list):
        raise SchemaError("document must contain a 'layers' list")
    if not doc["layers"]:
        raise SchemaError("'layers' list must not be empty")
    temperature = doc.get("temperature_K", 300.0)

    layers = []
    for idx, entry in enumerate(doc["layers"]):
        for key in ("material", "thickness_nm"):
            if key not in entry:
                raise SchemaError(f"layer {idx}: missing field {key!r}")
        try:
            lookup_material(entry["material"], temperature)
        except UnknownMaterialError as exc:
            raise SchemaError(f"layer {idx}: {exc.args[0]}") from exc
        try:
            layers.append(Layer(
                material=entry["material"],
                thickness_nm=float(entry["thickness_nm"]),
                donor_cm3=float(entry.get("donor_cm3", 0.0)),
                acceptor_cm3=float(entry.get("acceptor_cm3", 0.0)),
                label=str(entry.get("label", "")),
            ))
        except ValueError as exc:
            raise SchemaError(f"layer {idx}: {exc}") from exc
    return LayerStack(layers=tuple(layers), temperature=float(temperature),
                      name=str(doc.get("name", "")))


def serialize_stack(stack):
    """Inverse of parse_stack: LayerStack -> JSON string (round-trips)."""
    doc = {
        "name": stack.name,
        "temperature_K": stack.temperature,
        "layers": [asdict(l) for l in stack.layers],
    }
    return json.dumps(doc, indent=2)


def load_reference_stack():
    """The bundled reference diode configuration (device_fig1a.json)."""
    text = resources.files("dotdiode.data").joinpath("device_fig1a.json").read_text()
    return parse_stack(text)


@dataclass(frozen=True)
class Mesh1D:
    """Strictly increasing node positions [nm] with layer bookkeeping.

    `node_layer` assigns each node to a layer with the substrate-side
    tie-break at boundaries (a boundary node belongs to the layer below
    it); `element_layer` assigns each interval to its containing layer.
    `interface_ids` are node indices of internal layer boundaries.
    """

    nodes: np.ndarray
    node_layer: np.ndarray
    element_layer: np.ndarray
    interface_ids: np.ndarray
    stack_fingerprint: tuple = field(repr=False, default=())

    @property
    def n_nodes(self):
        return self.nodes.size

    def spacings(self):
        return np.diff(self.nodes)


def _stack_fingerprint(stack):
    return tuple((l.material, l.thickness_nm, l.donor_cm3, l.acceptor_cm3)
                 for l in stack.layers) + (stack.temperature,)


def build_mesh(stack, max_spacing=2.0, fine_spacing=0.125, refine_width=10.0):
    """Generate a graded mesh for `stack` (all options in nm).

    Every layer boundary becomes a node. Intervals within `refine_width`
    of a boundary use `fine_spacing`, the rest `max_spacing`. The defaults
    keep the band-edge discretization error of the reference diode below
    1 meV (checked by a mesh-halving test); the heavily doped contact
    junctions set the fine spacing, their Debye length being ~1.5 nm.
    """
    if max_spacing <= 0 or fine_spacing <= 0:
        raise MeshOptionError("spacings must be positive")
    if fine_spacing > max_spacing:
        raise MeshOptionError("fine_spacing must not exceed max_spacing")
    if refine_width < 0:
        raise MeshOptionError("refine_width must be non-negative")

    edges = stack.boundaries_nm()
    nodes = [0.0]
    for k in range(len(edges) - 1):
        x0, x1 = edges[k], edges[k + 1]
        cuts = sorted({x0, min(x0 + refine_width, x1), max(x1 - refine_width, x0), x1})
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b <= a:
                continue
            near_boundary = (a < x0 + refine_width - 1e-12) or (b > x1 - refine_width + 1e-12)
            h = fine_spacing if near_boundary else max_spacing
            nsub = max(1, int(np.ceil((b - a) / h - 1e-12)))
            seg = np.linspace(a, b, nsub + 1)
            nodes.extend(seg[1:].tolist())
    nodes = np.asarray(nodes)

    # boundary nodes must be exact, not linspace output
    interface_ids = []
    for k, edge in enumerate(edges):
        idx = int(np.argmin(np.abs(nodes - edge)))
        nodes[idx] = edge
        if 0 < k < len(edges) - 1:
            interface_ids.append(idx)

    node_layer = np.searchsorted(edges, nodes, side="left") - 1
    node_layer[0] = 0
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    element_layer = np.searchsorted(edges, mids, side="left") - 1

    mesh = Mesh1D(nodes=nodes, node_layer=node_layer,
                  element_layer=element_layer,
                  interface_ids=np.asarray(interface_ids, dtype=int),
                  stack_fingerprint=_stack_fingerprint(stack))
    _check_mesh(mesh, stack, max_spacing, fine_spacing, refine_width)
    return mesh


def _check_mesh(mesh, stack, max_spacing, fine_spacing, refine_width):
    h = mesh.spacings()
    if np.any(h <= 0):
        raise AssertionError("mesh nodes are not strictly increasing")
    if np.any(h > max_spacing * (1 + 1e-9)):
        raise AssertionError("max_spacing violated")
    edges = stack.boundaries_nm()
    lo, hi = mesh.nodes[:-1], mesh.nodes[1:]
    near = np.zeros_like(h, dtype=bool)
    for e in edges:
        near |= (lo < e + refine_width - 1e-9) & (hi > e - refine_width + 1e-9)
    if np.any(h[near] > fine_spacing * (1 + 1e-9)):
        raise AssertionError("fine_spacing violated near an interface")
    for e in edges:
        if not np.any(mesh.nodes == e):
            raise AssertionError(f"layer boundary {e} nm is not a mesh node")


def _require_matching(stack, mesh):
    if mesh.stack_fingerprint != _stack_fingerprint(stack):
        raise ProfileConsistencyError("mesh was not built from this stack")


def doping_profile(stack, mesh):
    """Per-node (N_D, N_A, eps_r) arrays sampled from the layer table.

    Doping at interface nodes takes the substrate-side layer's value;
    permittivity at interface nodes is the average of the two adjacent
    layers. For exact integrals use element_profile, whose values
    integrate to sum(thickness * density) per layer to < 1e-12 relative.
    """
    _require_matching(stack, mesh)
    mats = [lookup_material(l.material, stack.temperature) for l in stack.layers]
    nd_layer = np.array([l.donor_cm3 for l in stack.layers])
    na_layer = np.array([l.acceptor_cm3 for l in stack.layers])
    eps_layer = np.array([m.eps_r for m in mats])

    nd = nd_layer[mesh.node_layer]
    na = na_layer[mesh.node_layer]
    eps = eps_layer[mesh.node_layer].astype(float)
    for idx in mesh.interface_ids:
        below = mesh.node_layer[idx]
        eps[idx] = 0.5 * (eps_layer[below] + eps_layer[below + 1])
    return nd, na, eps


def element_profile(stack, mesh):
    """Per-element (N_D, N_A, eps_r) arrays from the containing layer."""
    _require_matching(stack, mesh)
    mats = [lookup_material(l.material, stack.temperature) for l in stack.layers]
    nd_layer = np.array([l.donor_cm3 for l in stack.layers])
    na_layer = np.array([l.acceptor_cm3 for l in stack.layers])
    eps_layer = np.array([m.eps_r for m in mats])
    el = mesh.element_layer
    return nd_layer[el], na_layer[el], eps_layer[el]
