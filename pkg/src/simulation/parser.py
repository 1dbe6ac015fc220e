# src/simulation/parser.py
import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from ..config.config import ALL_TESTS, DEFAULT_PRESET, DEFAULT_SEED, PRESETS
from ..errors import ScenarioError
from ..testing.schema import BootstrapPlan, TestConfig
from .laws import observation_law
from .schema import Scenario

logger = logging.getLogger(__name__)


class ScenarioParser:
    """
    Reads scenario files: blocks introduced by `[scenario <name>]` followed by
    `key = value` lines. `#` starts a comment. R and B default to the preset.

        [scenario table1-a0.5]
        lambda = 1.6
        alpha = 0.5          # both samples
        g1 = uniform02
        m = 50
        n = 50
    """

    HEADER = re.compile(r"^\[\s*scenario\s+([^\]]+?)\s*\]$", re.IGNORECASE)
    ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)$")

    # keys are case-sensitive: b is the window end, B the number of resamples
    ALIASES = {"lambda": "lam", "replications": "R", "bootstrap": "B", "seed": "master_seed"}
    FLOAT_KEYS = {"lam", "alpha", "alpha1", "alpha2", "theta", "level", "a", "b", "M",
                  "bandwidth_constant", "bandwidth_exponent"}
    INT_KEYS = {"m", "n", "R", "B", "master_seed"}
    TEXT_KEYS = {"g", "g1", "g2", "boundary_mode", "tests"}

    def __init__(self, preset: str = DEFAULT_PRESET, seed: int = DEFAULT_SEED):
        if preset not in PRESETS:
            raise ScenarioError(f"unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
        self.preset = preset
        self.seed = seed
        self.replications, self.resamples = PRESETS[preset]

    # ------------------ VALUES ------------------
    def _convert(self, key: str, raw: str, line_no: int) -> Any:
        try:
            if key in self.FLOAT_KEYS:
                return float(raw)
            if key in self.INT_KEYS:
                return int(raw)
        except ValueError:
            raise ScenarioError(f"line {line_no}: {key} = {raw!r} is not a number") from None
        if key in self.TEXT_KEYS:
            return raw
        raise ScenarioError(f"line {line_no}: unknown key {key!r}")

    def _entry(self, line: str, line_no: int) -> Tuple[str, Any]:
        m = self.ENTRY.match(line)
        if not m:
            raise ScenarioError(f"line {line_no}: expected 'key = value', got {line!r}")
        key = self.ALIASES.get(m.group(1), m.group(1))
        return key, self._convert(key, m.group(2).strip(), line_no)

    # ------------------ SCENARIOS ------------------
    def _build(self, name: str, fields: Dict[str, Any]) -> Scenario:
        if "alpha" in fields:
            fields.setdefault("alpha1", fields["alpha"])
            fields.setdefault("alpha2", fields["alpha"])
        if "g" in fields:
            fields.setdefault("g1", fields["g"])
            fields.setdefault("g2", fields["g"])
        for g_key in ("g1", "g2"):
            if g_key in fields:
                observation_law(fields[g_key])

        for key in ("lam", "alpha1", "alpha2", "theta", "m", "n", "R", "B"):
            if key in fields and fields[key] <= 0:
                raise ScenarioError(f"scenario {name!r}: {key} must be positive, got {fields[key]}")

        config_fields = {k: fields[k] for k in ("a", "b", "M", "bandwidth_constant", "bandwidth_exponent",
                                                 "boundary_mode") if k in fields}
        tests = ALL_TESTS
        if "tests" in fields:
            tests = tuple(t.strip() for t in fields["tests"].split(",") if t.strip())
        seed = fields.get("master_seed", self.seed)
        try:
            plan = BootstrapPlan(n_resamples=fields.get("B", self.resamples),
                                 level=fields.get("level", 0.05), rng_seed=seed)
            return Scenario(
                name=name, lam=fields["lam"], alpha1=fields["alpha1"], alpha2=fields["alpha2"],
                theta=fields.get("theta", 1.0), g1=fields.get("g1", "uniform02"),
                g2=fields.get("g2", "uniform02"), m=fields["m"], n=fields["n"],
                replications=fields.get("R", self.replications), plan=plan,
                config=TestConfig(**config_fields), master_seed=seed, tests=tests,
            )
        except KeyError as e:
            raise ScenarioError(f"scenario {name!r}: missing required key {e.args[0]!r}") from None
        except ValidationError as e:
            raise ScenarioError(f"scenario {name!r}: {e}") from None

    def parse_text(self, text: str) -> List[Scenario]:
        scenarios: List[Scenario] = []
        name: Optional[str] = None
        fields: Dict[str, Any] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            header = self.HEADER.match(line)
            if header:
                if name is not None:
                    scenarios.append(self._build(name, fields))
                name, fields = header.group(1), {}
                continue
            if name is None:
                raise ScenarioError(f"line {line_no}: entry outside a [scenario ...] block")
            key, value = self._entry(line, line_no)
            fields[key] = value
        if name is not None:
            scenarios.append(self._build(name, fields))

        logger.info(f"Parsed {len(scenarios)} scenario(s) with preset '{self.preset}'")
        return scenarios

    def parse_file(self, path: Union[str, Path]) -> List[Scenario]:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"scenario file not found at {path}")
        return self.parse_text(path.read_text(encoding="utf-8"))
