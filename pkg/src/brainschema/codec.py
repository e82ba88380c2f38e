"""Bijection between linear neuron indices and hierarchical region labels.

Neurons are ordered hierarchy-major: hemisphere outermost, then region,
column (lobule), microcolumn (microzone), layer slice (module), and the slot
of the neuron inside its final region innermost. Each level holds a global
number of units that is split over the units of the level above with the
balanced rule: ``n`` children over ``k`` parents gives the first ``n % k``
parents ``n // k + 1`` children and the rest ``n // k``. Every region at
every depth is therefore one contiguous index range.

Label text is 1-based; everything else is 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

from .schema import CortexConfig, SchemaConfig, check_config

MAX_DEPTH = 5
LEVELS = ("hemisphere", "region", "column", "microcolumn", "layer")
CEREBELLUM_LEVELS = ("hemisphere", "functional region", "lobule", "microzone", "module")


class AddressError(ValueError):
    def __init__(self, level: str, message: str):
        super().__init__(f"{level}: {message}")
        self.level = level


class LabelError(ValueError):
    """Label text that does not fit the config; ``position`` is 1-based."""

    def __init__(self, position: int, message: str):
        super().__init__(f"component {position}: {message}")
        self.position = position


def child_start(children: int, parents: int, parent: int) -> int:
    """Index of the first child owned by ``parent``; ``parent == parents`` gives ``children``."""
    q, r = divmod(children, parents)
    return parent * q + min(parent, r)


def parent_of(children: int, parents: int, child: int) -> int:
    q, r = divmod(children, parents)
    big = r * (q + 1)
    if child < big:
        return child // (q + 1)
    return r + (child - big) // q


class NeuronAddress(NamedTuple):
    """Structured coordinates of one neuron.

    For cerebellum configs ``column_idx`` is the lobule, ``microcolumn_idx``
    the microzone and ``layer_idx`` the module.
    """

    hemisphere_idx: int
    region_idx: int
    column_idx: int
    microcolumn_idx: int
    layer_idx: int
    slot_idx: int


@dataclass(frozen=True)
class RegionLabel:
    schema_kind: str
    components: tuple[str, ...]

    @property
    def depth(self) -> int:
        return len(self.components)

    def __str__(self) -> str:
        return "/".join(self.components)


class Codec:
    """Precomputed level tables for one config.

    Cheap to build; the module-level functions cache one per config.
    """

    def __init__(self, config: SchemaConfig):
        check_config(config)
        self.config = config
        self.kind = config.kind
        self.totals = config.level_totals()
        # (q, r, r*(q+1)) for splitting level d over level d-1; index 0 unused
        self._split: list = [None]
        for d in range(1, len(self.totals)):
            q, r = divmod(self.totals[d], self.totals[d - 1])
            self._split.append((q, r, r * (q + 1)))
        self.hemisphere_names = tuple(config.hemisphere_names)
        self.region_names = config.names_for_regions()
        self.regions_per_hemisphere = len(self.region_names)
        self.layer_names = tuple(config.layer_names) if self.kind == "cortex" else None
        self.level_names = LEVELS if self.kind == "cortex" else CEREBELLUM_LEVELS
        self._hemi_index = {n: i for i, n in enumerate(self.hemisphere_names)}
        self._region_index = {n: i for i, n in enumerate(self.region_names)}
        self._layer_index = ({n: i for i, n in enumerate(self.layer_names)}
                             if self.layer_names else None)

    @property
    def total_neurons(self) -> int:
        return self.totals[-1]

    # -- global unit indices <-> per-parent local indices --------------------

    def _globals_to_locals(self, g: list[int]) -> list[int]:
        t = self.totals
        out = [g[0]]
        for d in range(1, len(g)):
            out.append(g[d] - child_start(t[d], t[d - 1], g[d - 1]))
        return out

    def _ancestors(self, depth: int, unit: int) -> list[int]:
        """Global indices of ``unit`` (at level depth-1) and all its ancestors."""
        t = self.totals
        g = [0] * depth
        g[depth - 1] = unit
        for d in range(depth - 1, 0, -1):
            g[d - 1] = parent_of(t[d], t[d - 1], g[d])
        return g

    def _locals_to_unit(self, local: tuple[int, ...] | list[int]) -> int:
        t = self.totals
        if not 0 <= local[0] < t[0]:
            raise AddressError(self.level_names[0], f"index {local[0]} not in [0, {t[0]})")
        split = self._split
        g = local[0]
        for d in range(1, len(local)):
            q, r, _ = split[d]
            size = q + 1 if g < r else q
            if not 0 <= local[d] < size:
                raise AddressError(self.level_names[d], f"index {local[d]} not in [0, {size})")
            g = g * q + min(g, r) + local[d]
        return g

    def unit_range(self, depth: int, unit: int) -> tuple[int, int]:
        """Half-open neuron range covered by global unit ``unit`` at ``depth``."""
        t = self.totals
        lo, hi = unit, unit + 1
        for d in range(depth, len(t)):
            lo = child_start(t[d], t[d - 1], lo)
            hi = child_start(t[d], t[d - 1], hi)
        return lo, hi

    # -- neurons -------------------------------------------------------------

    def neuron_to_address(self, index: int) -> NeuronAddress:
        n = self.totals[-1]
        if not 0 <= index < n:
            raise IndexError(f"neuron index {index} not in [0, {n})")
        split = self._split
        local = [0] * (MAX_DEPTH + 1)
        child = index
        for d in range(MAX_DEPTH, 0, -1):
            q, r, big = split[d]
            if child < big:
                parent, local[d] = divmod(child, q + 1)
            else:
                p, local[d] = divmod(child - big, q)
                parent = r + p
            child = parent
        local[0] = child
        return NeuronAddress(*local)

    def address_to_neuron(self, address: NeuronAddress | tuple[int, ...]) -> int:
        a = NeuronAddress(*address)
        unit = self._locals_to_unit(a[:MAX_DEPTH])
        q, r, _ = self._split[-1]
        size = q + 1 if unit < r else q
        if not 0 <= a.slot_idx < size:
            raise AddressError("slot", f"index {a.slot_idx} not in [0, {size})")
        return unit * q + min(unit, r) + a.slot_idx

    # -- labels --------------------------------------------------------------

    def _format(self, local: list[int] | tuple[int, ...]) -> RegionLabel:
        parts = []
        for d, i in enumerate(local):
            if d == 0:
                parts.append(self.hemisphere_names[i])
            elif d == 1:
                parts.append(self.region_names[i])
            elif d == 4 and self.layer_names is not None:
                parts.append(self.layer_names[i])
            else:
                parts.append(str(i + 1))
        return RegionLabel(self.kind, tuple(parts))

    def unit_label(self, depth: int, unit: int) -> RegionLabel:
        return self._format(self._globals_to_locals(self._ancestors(depth, unit)))

    def encode(self, address: NeuronAddress | tuple[int, ...]) -> tuple[RegionLabel, int]:
        a = NeuronAddress(*address)
        self.address_to_neuron(a)  # range checks every level
        return self._format(a[:MAX_DEPTH]), a.slot_idx

    def neuron_label(self, index: int) -> tuple[RegionLabel, int]:
        a = self.neuron_to_address(index)
        return self._format(a[:MAX_DEPTH]), a.slot_idx

    def qualified_name(self, index: int) -> str:
        """``label#slot`` naming one neuron, slot 1-based."""
        label, slot = self.neuron_label(index)
        return f"{label}#{slot + 1}"

    def parse(self, text: str) -> tuple[RegionLabel, int]:
        """Validate label text; returns the label and the global unit it names."""
        if not isinstance(text, str) or not text:
            raise LabelError(1, "empty label")
        parts = text.split("/")
        if len(parts) > MAX_DEPTH:
            raise LabelError(MAX_DEPTH + 1, f"too many components ({len(parts)} > {MAX_DEPTH})")
        t = self.totals
        unit = 0
        for d, part in enumerate(parts):
            pos = d + 1
            if not part:
                raise LabelError(pos, "empty segment")
            if d == 0:
                idx = self._hemi_index.get(part)
                if idx is None:
                    raise LabelError(pos, f"unknown hemisphere {part!r}")
                size = t[0]
            else:
                lo = child_start(t[d], t[d - 1], unit)
                size = child_start(t[d], t[d - 1], unit + 1) - lo
                if d == 1:
                    idx = self._region_index.get(part)
                    if idx is None:
                        raise LabelError(pos, f"unknown region {part!r}")
                elif d == 4 and self._layer_index is not None:
                    idx = self._layer_index.get(part)
                    if idx is None:
                        raise LabelError(pos, f"unknown layer {part!r}")
                else:
                    if not part.isdigit() or not part.isascii() or part[0] == "0":
                        raise LabelError(pos, f"{part!r} is not a positive decimal without leading zeros")
                    idx = int(part) - 1
                if not idx < size:
                    raise LabelError(pos, f"{self.level_names[d]} {part} out of range (1..{size})")
            unit = idx if d == 0 else lo + idx
        return RegionLabel(self.kind, tuple(parts)), unit

    def region_range(self, label: RegionLabel | str) -> tuple[int, int]:
        parsed, unit = self.parse(str(label))
        if isinstance(label, RegionLabel) and label.schema_kind != self.kind:
            raise LabelError(1, f"{label.schema_kind} label used with a {self.kind} config")
        return self.unit_range(parsed.depth, unit)

    def resolve_qualified(self, name: str) -> int:
        label, sep, slot = name.rpartition("#")
        if not sep:
            raise LabelError(1, f"{name!r} has no '#slot' suffix")
        parsed, unit = self.parse(label)
        if parsed.depth != MAX_DEPTH:
            raise LabelError(parsed.depth, "qualified names need a full-depth label")
        if not slot.isdigit() or slot[0] == "0":
            raise LabelError(MAX_DEPTH + 1, f"bad slot {slot!r}")
        lo, hi = self.unit_range(MAX_DEPTH, unit)
        if int(slot) > hi - lo:
            raise LabelError(MAX_DEPTH + 1, f"slot {slot} out of range (1..{hi - lo})")
        return lo + int(slot) - 1


class RegionStream:
    """Lazy, indexable sequence of every label at one depth, hierarchy-major."""

    def __init__(self, codec: Codec, depth: int):
        if not isinstance(depth, int) or not 1 <= depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in 1..{MAX_DEPTH}, got {depth!r}")
        self.codec = codec
        self.depth = depth

    def __len__(self) -> int:
        return self.codec.totals[self.depth - 1]

    def __getitem__(self, k: int) -> RegionLabel:
        n = len(self)
        if k < 0:
            k += n
        if not 0 <= k < n:
            raise IndexError(k)
        return self.codec.unit_label(self.depth, k)

    def range_of(self, k: int) -> tuple[int, int]:
        return self.codec.unit_range(self.depth, k)

    def __iter__(self) -> Iterator[RegionLabel]:
        c = self.codec
        for k in range(len(self)):
            yield c.unit_label(self.depth, k)


_codecs: dict = {}


def get_codec(config: SchemaConfig) -> Codec:
    codec = _codecs.get(config)
    if codec is None:
        if len(_codecs) > 64:
            _codecs.clear()
        codec = _codecs[config] = Codec(config)
    return codec


def neuron_to_address(linear_index: int, config: SchemaConfig) -> NeuronAddress:
    return get_codec(config).neuron_to_address(linear_index)


def address_to_neuron(address: NeuronAddress, config: SchemaConfig) -> int:
    return get_codec(config).address_to_neuron(address)


def encode(address: NeuronAddress, config: SchemaConfig) -> tuple[RegionLabel, int]:
    return get_codec(config).encode(address)


def format_label(label: RegionLabel) -> str:
    return str(label)


def parse_label(text: str, config: SchemaConfig) -> RegionLabel:
    return get_codec(config).parse(text)[0]


def region_neuron_range(label: RegionLabel | str, config: SchemaConfig) -> tuple[int, int]:
    return get_codec(config).region_range(label)


def enumerate_regions(config: SchemaConfig, depth: int) -> RegionStream:
    return RegionStream(get_codec(config), depth)


def qualified_name(index: int, config: SchemaConfig) -> str:
    return get_codec(config).qualified_name(index)


def tiny_cortex(hemisphere_names: Optional[tuple[str, ...]] = None) -> CortexConfig:
    """160-neuron cortex used in docs and tests: 2x2 regions, 8 columns, 10 per microcolumn."""
    return CortexConfig(total_neurons=160, total_columns=8, neurons_per_microcolumn=10,
                        regions_per_hemisphere=2,
                        hemisphere_names=hemisphere_names or ("left", "right"))
