from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from ..composer import COMPOSITION_CLASSES

DEFAULT_SEED = 7
EXPORT_SCALE = 1024


@dataclass(frozen=True)
class DatasetRecipe:
    name: str
    total_examples: int
    class_mix: Mapping[str, Fraction]
    coast_enabled: bool = False
    template_sea_enabled: bool = False
    tidal_turbine_enabled: bool = False
    seed: int = DEFAULT_SEED
    export_scale: int = EXPORT_SCALE
    val_fraction: Fraction = field(default=Fraction(1, 20))
    train_shards: int = 8

    def __post_init__(self):
        if self.total_examples < 0:
            raise ValueError("total_examples must be non-negative")
        for cls in self.class_mix:
            if cls not in COMPOSITION_CLASSES:
                raise ValueError(f"unknown composition class {cls!r}")
        total = sum(Fraction(v) for v in self.class_mix.values())
        if abs(float(total) - 1.0) > 1e-9:
            raise ValueError(f"class fractions of {self.name} sum to {float(total)}, not 1")

    def with_overrides(self, **kw) -> "DatasetRecipe":
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update({k: v for k, v in kw.items() if v is not None})
        return DatasetRecipe(**data)

    def class_counts(self) -> dict[str, int]:
        return class_counts(self.class_mix, self.total_examples)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "total_examples": self.total_examples,
            "class_mix": {k: str(Fraction(v)) for k, v in self.class_mix.items()},
            "class_counts": self.class_counts(),
            "coast_enabled": self.coast_enabled,
            "template_sea_enabled": self.template_sea_enabled,
            "tidal_turbine_enabled": self.tidal_turbine_enabled,
            "seed": self.seed,
            "export_scale": self.export_scale,
            "val_fraction": str(self.val_fraction),
            "train_shards": self.train_shards,
        }

    @classmethod
    def from_json(cls, data: dict) -> "DatasetRecipe":
        return cls(
            name=data["name"],
            total_examples=int(data["total_examples"]),
            class_mix={k: Fraction(str(v)) for k, v in data["class_mix"].items()},
            coast_enabled=bool(data.get("coast_enabled", False)),
            template_sea_enabled=bool(data.get("template_sea_enabled", False)),
            tidal_turbine_enabled=bool(data.get("tidal_turbine_enabled", False)),
            seed=int(data.get("seed", DEFAULT_SEED)),
            export_scale=int(data.get("export_scale", EXPORT_SCALE)),
            val_fraction=Fraction(str(data.get("val_fraction", "1/20"))),
            train_shards=int(data.get("train_shards", 8)),
        )


def class_counts(mix: Mapping[str, Fraction], total: int) -> dict[str, int]:
    """Floor every share, then hand out the remainder by largest fractional
    part; ties go to the class name that sorts first."""
    exact = {k: Fraction(v) * total for k, v in mix.items()}
    counts = {k: math.floor(v) for k, v in exact.items()}
    remainder = total - sum(counts.values())
    order = sorted(exact, key=lambda k: (-(exact[k] - counts[k]), k))
    for k in order[:remainder]:
        counts[k] += 1
    return counts


def builtin_recipes() -> list[DatasetRecipe]:
    F = Fraction
    three = {
        "owf-small": F(1, 6),
        "owf-medium": F(1, 3),
        "owf-large": F(1, 6),
        "none-target-rigs": F(1, 6),
        "none-target-land": F(1, 6),
    }
    return [
        DatasetRecipe("dataset-1", 45_000, {"owf-small": F(1)}),
        DatasetRecipe("dataset-2", 90_000, {"owf-small": F(1, 4), "owf-medium": F(2, 4), "owf-large": F(1, 4)}),
        DatasetRecipe("dataset-3", 90_000, three, coast_enabled=True, template_sea_enabled=True),
        DatasetRecipe("dataset-3+", 90_000, dict(three), coast_enabled=True, template_sea_enabled=True,
                      tidal_turbine_enabled=True),
    ]


def get_recipe(name: str) -> DatasetRecipe:
    for r in builtin_recipes():
        if r.name == name:
            return r
    raise KeyError(f"unknown recipe {name!r}; built-in: {[r.name for r in builtin_recipes()]}")


def load_recipe(path) -> DatasetRecipe:
    with open(path, encoding="utf-8") as fh:
        return DatasetRecipe.from_json(json.load(fh))
