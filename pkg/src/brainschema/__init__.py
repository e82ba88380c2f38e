"""Hierarchical brain-region naming for brain-scale sparse networks."""

from .codec import (AddressError, LabelError, NeuronAddress, RegionLabel, address_to_neuron,
                    encode, enumerate_regions, get_codec, neuron_to_address, parse_label,
                    qualified_name, region_neuron_range, tiny_cortex)
from .generate import BlockSpec, Triple, generate_block, label_triples, plan_blocks
from .ingest import IngestError, IngestMetrics, measure_rates, run_ingest
from .schema import (CerebellumConfig, ConfigError, CortexConfig, CortexDerived,
                     canonical_configs, derive_cortex_row, total_regions, validate_config)
from .store import DurableStore, MemoryStore, durable_store, memory_store

__version__ = "0.1.0"
