"""Flat `key = value` config files.

One option per line; `#` starts a comment; blank lines ignored. Values stay
strings here — each consumer (PpoConfig, MetricsConfig, grid seeds) coerces
its own keys and ignores the rest. See README for the full schema.
"""

from typing import Dict, List


def parse_config_text(text: str) -> Dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', "
                             f"got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path) -> Dict[str, str]:
    with open(path) as fh:
        return parse_config_text(fh.read())


def parse_seed_list(raw: str) -> List[int]:
    return [int(tok) for tok in raw.replace(",", " ").split()]
