"""Schema parameters for the cortex and cerebellum naming hierarchies.

Everything here is exact integer arithmetic. Per-region quotients use floor
division and carry their remainders explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional, Union

DEFAULT_HEMISPHERES = ("left", "right")
CORTEX_LAYERS = ("II", "III", "IV", "V", "VI")
CEREBELLUM_LAYERS = ("molecular", "purkinje", "granular")

# Chosen so 2*3*10*5*modules >= 1.3e9, the larger cortex region count.
DEFAULT_MODULES_PER_MICROZONE = 4_333_334


class ConfigError(ValueError):
    """Raised when a configuration cannot be used; ``field`` names the culprit."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def placeholder_names(prefix: str, count: int) -> tuple[str, ...]:
    width = max(2, len(str(count)))
    return tuple(f"{prefix}_{i:0{width}d}" for i in range(1, count + 1))


@dataclass(frozen=True)
class Violation:
    field: str
    message: str
    severity: str = "error"  # "error" | "warning"

    def __str__(self) -> str:
        return f"{self.severity}: {self.field}: {self.message}"


@dataclass(frozen=True)
class CortexConfig:
    total_neurons: int = 21_000_000_000
    total_columns: int = 210_000
    neurons_per_microcolumn: int = 100
    regions_per_hemisphere: int = 31
    hemisphere_names: tuple[str, ...] = DEFAULT_HEMISPHERES
    layer_names: tuple[str, ...] = CORTEX_LAYERS
    # None means region_01 .. region_NN in every hemisphere.
    region_names: Optional[tuple[str, ...]] = None

    kind = "cortex"

    @property
    def hemispheres(self) -> int:
        return len(self.hemisphere_names)

    @property
    def regions(self) -> int:
        return self.hemispheres * self.regions_per_hemisphere

    @property
    def layers(self) -> int:
        return len(self.layer_names)

    @property
    def total_microcolumns(self) -> int:
        return self.total_neurons // self.neurons_per_microcolumn

    def names_for_regions(self) -> tuple[str, ...]:
        if self.region_names is not None:
            return tuple(self.region_names)
        return placeholder_names("region", self.regions_per_hemisphere)

    def level_totals(self) -> tuple[int, ...]:
        """Global unit counts for hemisphere, region, column, microcolumn,
        layer slice, and finally neurons."""
        m = self.total_microcolumns
        return (self.hemispheres, self.regions, self.total_columns, m, m * self.layers,
                self.total_neurons)


@dataclass(frozen=True)
class CerebellumConfig:
    total_neurons: int = 100_000_000_000
    functional_regions: int = 3
    lobules: int = 10
    microzones: int = 5
    modules_per_microzone: int = DEFAULT_MODULES_PER_MICROZONE
    hemisphere_names: tuple[str, ...] = DEFAULT_HEMISPHERES
    # Cell layers are not a label component; kept for slot sub-addressing.
    layer_names: tuple[str, ...] = CEREBELLUM_LAYERS
    region_names: Optional[tuple[str, ...]] = None

    kind = "cerebellum"

    @property
    def hemispheres(self) -> int:
        return len(self.hemisphere_names)

    @property
    def regions_per_hemisphere(self) -> int:
        return self.functional_regions

    @property
    def total_modules(self) -> int:
        return (self.hemispheres * self.functional_regions * self.lobules
                * self.microzones * self.modules_per_microzone)

    def names_for_regions(self) -> tuple[str, ...]:
        if self.region_names is not None:
            return tuple(self.region_names)
        return placeholder_names("region", self.functional_regions)

    def level_totals(self) -> tuple[int, ...]:
        h = self.hemispheres
        r = h * self.functional_regions
        lob = r * self.lobules
        mz = lob * self.microzones
        return (h, r, lob, mz, mz * self.modules_per_microzone, self.total_neurons)


SchemaConfig = Union[CortexConfig, CerebellumConfig]


@dataclass(frozen=True)
class Discrepancy:
    field: str
    printed: int
    derived: int

    def __str__(self) -> str:
        return f"{self.field}: printed {self.printed:,}, derived {self.derived:,}"


@dataclass(frozen=True)
class CortexDerived:
    """One materialized row of the cortex ranges table."""

    config: CortexConfig
    columns_per_region: int
    columns_per_region_remainder: int
    microcolumns_per_column: int
    microcolumns_per_column_remainder: int
    total_microcolumns: int
    microcolumns_per_region: int
    microcolumns_per_region_remainder: int
    regions_at_column_granularity: int
    neurons_per_column_region: int
    regions_at_microcolumn_granularity: int
    neurons_per_final_region: int
    neuron_remainder: int = 0
    exact: bool = True
    discrepancies: tuple[Discrepancy, ...] = field(default=())

    def as_row(self) -> dict[str, int]:
        """Cells in the reference table's column order."""
        c = self.config
        return {
            "cortex_regions": c.regions,
            "columns": c.total_columns,
            "columns_per_region": self.columns_per_region,
            "microcolumns_per_column": self.microcolumns_per_column,
            "microcolumns": self.total_microcolumns,
            "layers": c.layers,
            "microcolumns_per_region": self.microcolumns_per_region,
            "regions_columns": self.regions_at_column_granularity,
            "neurons_per_region_columns": self.neurons_per_column_region,
            "regions_microcolumns": self.regions_at_microcolumn_granularity,
            "neurons_per_region_microcolumns": self.neurons_per_final_region,
            "total_neurons": c.total_neurons,
        }


TABLE1_COLUMNS = (
    "cortex_regions", "columns", "columns_per_region", "microcolumns_per_column",
    "microcolumns", "layers", "microcolumns_per_region", "regions_columns",
    "neurons_per_region_columns", "regions_microcolumns",
    "neurons_per_region_microcolumns", "total_neurons",
)

# As printed, erratum included: the last row's 2,100 microcolumns per column
# cannot hold next to 260,000,000 microcolumns over 100,000 columns.
REFERENCE_TABLE = (
    (62, 210_000, 3_387, 1_000, 210_000_000, 5, 3_387_096, 1_050_000, 20_000, 1_050_000_000, 20, 21_000_000_000),
    (62, 21_000_000, 338_709, 10, 210_000_000, 5, 3_387_096, 105_000_000, 200, 1_050_000_000, 20, 21_000_000_000),
    (62, 2_100_000, 33_870, 100, 210_000_000, 5, 3_387_096, 10_500_000, 2_000, 1_050_000_000, 20, 21_000_000_000),
    (62, 100_000, 1_612, 2_100, 210_000_000, 5, 3_387_096, 500_000, 42_000, 1_050_000_000, 20, 21_000_000_000),
    (62, 260_000, 4_193, 1_000, 260_000_000, 5, 4_193_548, 1_300_000, 20_000, 1_300_000_000, 20, 26_000_000_000),
    (62, 26_000_000, 419_354, 10, 260_000_000, 5, 4_193_548, 130_000_000, 200, 1_300_000_000, 20, 26_000_000_000),
    (62, 2_600_000, 41_935, 100, 260_000_000, 5, 4_193_548, 13_000_000, 2_000, 1_300_000_000, 20, 26_000_000_000),
    (62, 100_000, 1_612, 2_100, 260_000_000, 5, 4_193_548, 500_000, 52_000, 1_300_000_000, 20, 26_000_000_000),
)


def canonical_configs() -> list[CortexConfig]:
    """The eight cortex configurations behind the reference ranges table."""
    return [CortexConfig(total_neurons=row[11], total_columns=row[1]) for row in REFERENCE_TABLE]


def reference_row(config: CortexConfig) -> Optional[dict[str, int]]:
    if config.neurons_per_microcolumn != 100:
        return None
    for row in REFERENCE_TABLE:
        cells = dict(zip(TABLE1_COLUMNS, row))
        if (cells["cortex_regions"] == config.regions and cells["columns"] == config.total_columns
                and cells["layers"] == config.layers
                and cells["total_neurons"] == config.total_neurons):
            return cells
    return None


def _positive(report: list[Violation], name: str, value: int) -> bool:
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        report.append(Violation(name, f"must be a positive integer, got {value!r}"))
        return False
    return True


def _check_names(report: list[Violation], name: str, names, expected: Optional[int] = None):
    if names is None:
        return
    names = tuple(names)
    if not names:
        report.append(Violation(name, "must not be empty"))
        return
    if len(set(names)) != len(names):
        report.append(Violation(name, "entries must be unique"))
    for n in names:
        if not isinstance(n, str) or not n or any(ch in n for ch in "/#\x00") or n != n.strip():
            report.append(Violation(name, f"invalid name {n!r}"))
        elif n.isdigit():
            report.append(Violation(name, f"name {n!r} must not be purely numeric"))
    if expected is not None and len(names) != expected:
        report.append(Violation(name, f"expected {expected} names, got {len(names)}"))


def validate_config(config: SchemaConfig) -> list[Violation]:
    """Return every problem with ``config``; an empty list means usable.

    Warnings flag configurations that work but divide inexactly."""
    report: list[Violation] = []
    _check_names(report, "hemisphere_names", config.hemisphere_names)
    _check_names(report, "layer_names", config.layer_names)

    if isinstance(config, CortexConfig):
        ok = all([
            _positive(report, "total_neurons", config.total_neurons),
            _positive(report, "total_columns", config.total_columns),
            _positive(report, "neurons_per_microcolumn", config.neurons_per_microcolumn),
            _positive(report, "regions_per_hemisphere", config.regions_per_hemisphere),
        ])
        _check_names(report, "region_names", config.region_names, config.regions_per_hemisphere)
        if not ok or not config.hemisphere_names or not config.layer_names:
            return report
        rem = config.total_neurons % config.neurons_per_microcolumn
        if rem:
            report.append(Violation(
                "total_neurons",
                f"inexact division by neurons_per_microcolumn, remainder {rem}", "warning"))
        h, regions, columns, micro, slices, neurons = config.level_totals()
        if columns < regions:
            report.append(Violation("total_columns", f"{columns} columns cannot cover {regions} regions"))
        if micro < columns:
            report.append(Violation(
                "neurons_per_microcolumn",
                f"{micro} microcolumns cannot cover {columns} columns"))
        if neurons < slices:
            report.append(Violation(
                "layer_names", f"{slices} final regions exceed {neurons} neurons"))
        if micro and micro % columns:
            report.append(Violation(
                "total_columns",
                f"inexact microcolumns per column, remainder {micro % columns}", "warning"))
    else:
        ok = all([
            _positive(report, "total_neurons", config.total_neurons),
            _positive(report, "functional_regions", config.functional_regions),
            _positive(report, "lobules", config.lobules),
            _positive(report, "microzones", config.microzones),
            _positive(report, "modules_per_microzone", config.modules_per_microzone),
        ])
        _check_names(report, "region_names", config.region_names, config.functional_regions)
        if not ok or not config.hemisphere_names:
            return report
        modules = config.total_modules
        if config.total_neurons < modules:
            report.append(Violation(
                "modules_per_microzone", f"{modules} modules exceed {config.total_neurons} neurons"))
        elif config.total_neurons % modules:
            report.append(Violation(
                "total_neurons",
                f"inexact neurons per module, remainder {config.total_neurons % modules}", "warning"))
    return report


def check_config(config: SchemaConfig) -> None:
    for v in validate_config(config):
        if v.severity == "error":
            raise ConfigError(v.field, v.message)


def derive_cortex_row(config: CortexConfig) -> CortexDerived:
    check_config(config)
    regions = config.regions
    neurons = config.total_neurons
    micro, neuron_rem = divmod(neurons, config.neurons_per_microcolumn)
    cpr, cpr_rem = divmod(config.total_columns, regions)
    mpc, mpc_rem = divmod(micro, config.total_columns)
    mpr, mpr_rem = divmod(micro, regions)
    col_regions = config.total_columns * config.layers
    final_regions = micro * config.layers
    per_col_region, r1 = divmod(neurons, col_regions)
    per_final, r2 = divmod(neurons, final_regions)
    derived = CortexDerived(
        config=config,
        columns_per_region=cpr,
        columns_per_region_remainder=cpr_rem,
        microcolumns_per_column=mpc,
        microcolumns_per_column_remainder=mpc_rem,
        total_microcolumns=micro,
        microcolumns_per_region=mpr,
        microcolumns_per_region_remainder=mpr_rem,
        regions_at_column_granularity=col_regions,
        neurons_per_column_region=per_col_region,
        regions_at_microcolumn_granularity=final_regions,
        neurons_per_final_region=per_final,
        neuron_remainder=neuron_rem,
        exact=not (neuron_rem or mpc_rem or r1 or r2),
    )
    printed = reference_row(config)
    if printed is None:
        return derived
    mine = derived.as_row()
    diffs = tuple(Discrepancy(k, printed[k], mine[k]) for k in TABLE1_COLUMNS if printed[k] != mine[k])
    return CortexDerived(**{f.name: getattr(derived, f.name) for f in fields(derived)
                            if f.name != "discrepancies"}, discrepancies=diffs)


def total_regions(config: SchemaConfig) -> int:
    """Number of smallest labelled regions (full-depth labels)."""
    if isinstance(config, CortexConfig):
        return derive_cortex_row(config).regions_at_microcolumn_granularity
    check_config(config)
    return config.total_modules
