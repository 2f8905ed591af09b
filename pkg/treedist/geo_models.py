"""
Pydantic models for distance options and CLI configuration
Validates user-facing choices before any tree is touched
"""

from enum import Enum
from pathlib import Path
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DEFAULT_CHAIN_CAP = 1_000_000


class Algorithm(str, Enum):
    """Core search used on each no-common-split subproblem"""

    DYNAMIC = "dynamic"
    DIVIDE = "divide"
    BRUTE = "brute"


class OutputFormat(str, Enum):
    """Matrix output encodings"""

    CSV = "csv"
    TSV = "tsv"
    JSON = "json"


class Subcommand(str, Enum):
    DIST = "dist"
    MATRIX = "matrix"
    SPLITS = "splits"


class GeoOptions(BaseModel):
    """Options for one geodesic computation"""

    model_config = ConfigDict(use_enum_values=True, frozen=True)

    algorithm: Algorithm = Field(default=Algorithm.DIVIDE)
    include_leaves: bool = Field(default=False)
    chain_cap: int = Field(default=DEFAULT_CHAIN_CAP, ge=1, description="Maximal chains brute force may enumerate")


class CliConfig(BaseModel):
    """One parsed command line"""

    model_config = ConfigDict(use_enum_values=True)

    subcommand: Subcommand
    input: Path
    algorithm: Algorithm = Field(default=Algorithm.DIVIDE)
    include_leaves: bool = Field(default=False)
    output_format: OutputFormat = Field(default=OutputFormat.CSV)
    output_path: Optional[Path] = None
    default_length: Optional[float] = Field(default=None, ge=0)
    pair: Optional[Tuple[int, int]] = None
    chain_cap: int = Field(default=DEFAULT_CHAIN_CAP, ge=1)
    workers: int = Field(default=1, ge=1)
    verbose: bool = False
    dot: bool = False
    json_output: bool = False

    @field_validator("pair")
    @classmethod
    def validate_pair(cls, v):
        """Tree indices are 0-based positions in the input file"""
        if v is not None:
            i, j = v
            if i < 0 or j < 0:
                raise ValueError("pair indices must be >= 0")
        return v

    @model_validator(mode="after")
    def check_subcommand_flags(self):
        if self.pair is not None and self.subcommand != Subcommand.DIST:
            raise ValueError("--pair only applies to the dist subcommand")
        return self

    def geo_options(self) -> GeoOptions:
        return GeoOptions(
            algorithm=self.algorithm,
            include_leaves=self.include_leaves,
            chain_cap=self.chain_cap,
        )
