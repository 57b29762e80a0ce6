"""Scenario documents: JSON files tying an attack, a code, noise and protocol settings together.

Schema (every section optional unless a subcommand needs it)::

    {
      "attack":   {"probe_dim": 2, "e00": [[re, im], ...], "e01": ..., "e10": ..., "e11": ...},
      "attacks":  [<attack>, ...],            # one per key bit, instead of "attack"
      "noise":    {"alphas": [...], "ps": [...]},   # "ps" optional
      "code":     {"v": "110", "ecc_strings": ["011"], "ecc_bits": [0]},
      "protocol": {"n_raw": 10000, "p_allowed": 0.05, "rng_seed": 7,
                   "per_bit_error": [...]},  # optional, overrides the attack
      "bounds":   {"n": 1000, "r": 10, "alpha": 0.5, "p_test": 0.02,
                   "delta": 0.005, "mode": "uniform", "weights": [...]},
      "monte_carlo": {"n_sifted": 200, "p": 0.05, "delta": 0.05, "trials": 10000}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import attack as attack_mod
from . import gf2
from .attack import AttackSpec
from .gf2 import BitString, ParityCode
from .protocol import ProtocolConfig
from .security import PerBitNoise


class ScenarioError(ValueError):
    """Problem in a scenario document; ``where`` names the field or line."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class Scenario:
    raw: dict
    attacks: list[AttackSpec] = field(default_factory=list)
    per_bit_attacks: bool = False
    code_strings: tuple[BitString, list[BitString], list[int]] | None = None
    noise_raw: dict | None = None
    protocol: ProtocolConfig | None = None
    bounds: dict = field(default_factory=dict)
    monte_carlo: dict = field(default_factory=dict)

    def code(self) -> ParityCode:
        if self.code_strings is None:
            raise ScenarioError("code", "section is missing")
        v, ecc, bits = self.code_strings
        try:
            return ParityCode(v, tuple(ecc), tuple(bits))
        except gf2.GF2Error as exc:
            raise ScenarioError("code", str(exc)) from None

    def noise(self) -> PerBitNoise:
        """Per-bit noise from the "noise" section, else derived from the attack(s)."""
        n = self.code().n
        if self.noise_raw is not None:
            try:
                noise = PerBitNoise(tuple(self.noise_raw["alphas"]), _opt_tuple(self.noise_raw.get("ps")))
            except KeyError:
                raise ScenarioError("noise.alphas", "field is missing") from None
            except ValueError as exc:
                raise ScenarioError("noise", str(exc)) from None
        elif self.attacks:
            attacks = self.attacks if self.per_bit_attacks else self.attacks * n
            noise = attack_mod.per_bit_noise_from_attacks(attacks)
        else:
            raise ScenarioError("noise", "need a noise section or an attack to derive it from")
        if noise.n != n:
            raise ScenarioError("noise", f"covers {noise.n} bits but the code has n = {n}")
        return noise

    def error_model(self):
        proto = self.raw.get("protocol", {})
        if "per_bit_error" in proto:
            return [float(p) for p in proto["per_bit_error"]]
        if not self.attacks:
            raise ScenarioError("protocol", "need per_bit_error or an attack")
        return self.attacks if self.per_bit_attacks else self.attacks[0]


def _opt_tuple(x):
    return None if x is None else tuple(x)


def _attack(d: Any, where: str) -> AttackSpec:
    if not isinstance(d, dict):
        raise ScenarioError(where, "expected an object")
    try:
        return AttackSpec.from_dict(d)
    except attack_mod.AttackError as exc:
        raise ScenarioError(where, str(exc)) from None


def _bits(s: Any, where: str) -> BitString:
    if not isinstance(s, str):
        raise ScenarioError(where, "expected a 0/1 string")
    try:
        return BitString.from_str(s)
    except gf2.GF2Error as exc:
        raise ScenarioError(where, str(exc)) from None


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("<root>", "expected a JSON object")
    sc = Scenario(raw=doc)
    if "attack" in doc and "attacks" in doc:
        raise ScenarioError("attack", "give either 'attack' or 'attacks', not both")
    if "attack" in doc:
        sc.attacks = [_attack(doc["attack"], "attack")]
    elif "attacks" in doc:
        sc.attacks = [_attack(a, f"attacks[{i}]") for i, a in enumerate(doc["attacks"])]
        sc.per_bit_attacks = True

    if "code" in doc:
        c = doc["code"]
        if not isinstance(c, dict) or "v" not in c:
            raise ScenarioError("code.v", "field is missing")
        v = _bits(c["v"], "code.v")
        ecc = [_bits(s, f"code.ecc_strings[{i}]") for i, s in enumerate(c.get("ecc_strings", []))]
        bits = list(c.get("ecc_bits", [0] * len(ecc)))
        sc.code_strings = (v, ecc, bits)
        if v.value == 0:
            raise ScenarioError("code.v", "all-zero privacy-amplification string")
        if sc.per_bit_attacks and len(sc.attacks) != v.n:
            raise ScenarioError("attacks", f"{len(sc.attacks)} attacks for n = {v.n} key bits")

    if "noise" in doc:
        sc.noise_raw = doc["noise"]

    if "protocol" in doc:
        p = doc["protocol"]
        try:
            sc.protocol = ProtocolConfig(int(p["n_raw"]), float(p.get("p_allowed", 0.11)), int(p.get("rng_seed", 0)))
        except KeyError as exc:
            raise ScenarioError(f"protocol.{exc.args[0]}", "field is missing") from None
        except (TypeError, ValueError) as exc:
            raise ScenarioError("protocol", str(exc)) from None

    sc.bounds = dict(doc.get("bounds", {}))
    sc.monte_carlo = dict(doc.get("monte_carlo", {}))
    return sc


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return parse_scenario(doc)
