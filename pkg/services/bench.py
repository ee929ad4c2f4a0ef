"""
Bench Module
============
Runs GFR over freshly generated random instances and tabulates traversal
counts and memory against the quadratic time and logarithmic memory bounds.
Rows are deterministic: every row has its own seed drawn from the base seed.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from core.config import SimSettings, default_settings
from core.errors import GenerationExhausted
from services.instance_kit import random_instance
from services.routing_agent import gfr

logger = logging.getLogger(__name__)

SEED_RETRIES = 8


@dataclass
class BenchRow:
    genus: int
    nodes: int
    seed: int
    traversals: int
    peak_bits: int
    ntbws_visited: int
    delivered: bool
    ceiling_bits: float

    @property
    def time_ratio(self) -> float:
        return self.traversals / ((self.genus + 1) ** 2 * self.nodes ** 2)

    @property
    def memory_ratio(self) -> float:
        return self.peak_bits / ((self.genus + 1) * np.log2(max(self.nodes, 2)))

    def to_dict(self) -> Dict:
        return {
            "genus": self.genus,
            "nodes": self.nodes,
            "seed": self.seed,
            "traversals": self.traversals,
            "peak_bits": self.peak_bits,
            "ntbws_visited": self.ntbws_visited,
            "delivered": str(self.delivered).lower(),
        }


@dataclass
class BenchTable:
    rows: List[BenchRow] = field(default_factory=list)
    skipped: List[Dict] = field(default_factory=list)

    @property
    def all_delivered(self) -> bool:
        return all(r.delivered for r in self.rows)

    @property
    def within_ceiling(self) -> bool:
        return all(r.peak_bits <= r.ceiling_bits for r in self.rows)

    def summary(self) -> Dict:
        if not self.rows:
            return {"rows": 0, "max_time_ratio": 0.0, "max_memory_ratio": 0.0, "all_delivered": "true"}
        time_ratios = np.array([r.time_ratio for r in self.rows])
        memory_ratios = np.array([r.memory_ratio for r in self.rows])
        return {
            "rows": len(self.rows),
            "max_time_ratio": round(float(time_ratios.max()), 4),
            "mean_time_ratio": round(float(time_ratios.mean()), 4),
            "max_memory_ratio": round(float(memory_ratios.max()), 4),
            "all_delivered": str(self.all_delivered).lower(),
            "within_memory_ceiling": str(self.within_ceiling).lower(),
        }


def row_seeds(seed: int, genus_list: Sequence[int], size_list: Sequence[int], runs: int) -> List[tuple]:
    rng = random.Random(seed)
    return [(g, n, rng.randrange(2 ** 31)) for g in genus_list for n in size_list for _ in range(runs)]


def run_row(genus: int, nodes: int, seed: int, settings: SimSettings) -> Optional[BenchRow]:
    for attempt in range(SEED_RETRIES):
        try:
            instance = random_instance(genus, nodes, seed + attempt, settings)
            break
        except GenerationExhausted as exc:
            logger.warning("g=%d n=%d seed=%d: %s", genus, nodes, seed + attempt, exc)
    else:
        return None
    _, graph = instance.build(settings)
    result = gfr(graph, settings)
    return BenchRow(
        genus=genus,
        nodes=nodes,
        seed=seed + attempt,
        traversals=result.traversal_count,
        peak_bits=result.peak_memory_bits,
        ntbws_visited=result.ntbw_count,
        delivered=result.delivered,
        ceiling_bits=result.memory_ceiling_bits,
    )


def run_bench(genus_list: Sequence[int], size_list: Sequence[int], runs: int = 1, seed: int = 0,
              settings: Optional[SimSettings] = None) -> BenchTable:
    settings = settings or default_settings()
    table = BenchTable()
    for g, n, row_seed in row_seeds(seed, genus_list, size_list, runs):
        row = run_row(g, n, row_seed, settings)
        if row is None:
            table.skipped.append({"genus": g, "nodes": n, "seed": row_seed})
            continue
        logger.info("bench g=%d n=%d seed=%d traversals=%d bits=%d delivered=%s",
                    g, n, row.seed, row.traversals, row.peak_bits, row.delivered)
        table.rows.append(row)
    return table
