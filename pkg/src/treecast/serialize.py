"""Deterministic text serialization for every treecast artifact.

All floating-point values are printed with 17 significant digits so the
decimal text round-trips to the identical IEEE double, and all composite
output (JSON with sorted keys, fixed comment headers, no timestamps) is a
pure function of its inputs.  Re-running a command with the same
configuration therefore reproduces files byte for byte.

Formats:

* atomic distributions: two columns ``value weight`` per line, with
  ``inf`` / ``-inf`` tokens for infinite atoms;
* conditional pairs: a ``depth`` line followed by tagged ``law0`` /
  ``law1`` blocks in the two-column format;
* populations: a key-value header (size, depth, seed, channel entries)
  followed by tagged sample blocks;
* reports: JSON with sorted keys; curves: CSV with the run configuration
  embedded in ``#`` comment lines.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import InvalidParameter
from .channels import BinaryChannel
from .atoms import AtomicDistribution, ConditionalPair
from .conditioning import Coupling
from .sampling import Population


def fmt_float(x: float) -> str:
    """17-significant-digit text for a float; ``inf``/``-inf``/``nan`` tokens."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def canonical_json(obj, level: int = 0) -> str:
    """Render JSON deterministically: sorted keys, 17-digit floats.

    Non-finite floats become the strings "inf", "-inf", "nan" (JSON has
    no literal for them).  numpy scalars and arrays are accepted.
    """
    pad = "  " * level
    inner = "  " * (level + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for key in sorted(obj):
            items.append(f"{inner}{json.dumps(str(key))}: "
                         f"{canonical_json(obj[key], level + 1)}")
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{inner}{canonical_json(v, level + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return json.dumps(fmt_float(x))
        return fmt_float(x)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise InvalidParameter(f"cannot serialize {type(obj).__name__}")


def save_distribution(dist: AtomicDistribution) -> str:
    """Two-column text: one ``value weight`` line per atom."""
    lines = [f"{fmt_float(v)} {fmt_float(w)}"
             for v, w in zip(dist.values, dist.weights)]
    return "\n".join(lines) + "\n"


def load_distribution(text: str) -> AtomicDistribution:
    values, weights = [], []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidParameter(f"bad atom line: {line!r}")
        values.append(float(parts[0]))
        weights.append(float(parts[1]))
    return AtomicDistribution(np.array(values), np.array(weights))


def save_pair(pair: ConditionalPair) -> str:
    """Depth-tagged pair of two-column blocks (zero-weight atoms dropped)."""
    law0, law1 = pair.law0, pair.law1
    out = [f"depth {pair.depth}", f"law0 {len(law0)}"]
    out += [f"{fmt_float(v)} {fmt_float(w)}" for v, w in zip(law0.values, law0.weights)]
    out.append(f"law1 {len(law1)}")
    out += [f"{fmt_float(v)} {fmt_float(w)}" for v, w in zip(law1.values, law1.weights)]
    return "\n".join(out) + "\n"


def load_pair(text: str) -> ConditionalPair:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("depth "):
        raise InvalidParameter("pair text must start with a depth line")
    depth = int(lines[0].split()[1])
    cursor = 1
    laws = {}
    for tag in ("law0", "law1"):
        head = lines[cursor].split()
        if head[0] != tag:
            raise InvalidParameter(f"expected {tag} block, got {lines[cursor]!r}")
        count = int(head[1])
        block = lines[cursor + 1: cursor + 1 + count]
        cursor += 1 + count
        vals = np.array([float(ln.split()[0]) for ln in block])
        wts = np.array([float(ln.split()[1]) for ln in block])
        laws[tag] = (vals, wts)

    # rebuild the shared support as the union of the two atom sets
    v0, w0 = laws["law0"]
    v1, w1 = laws["law1"]
    support = np.union1d(v0, v1)
    full0 = np.zeros(len(support))
    full1 = np.zeros(len(support))
    full0[np.searchsorted(support, v0)] = w0
    full1[np.searchsorted(support, v1)] = w1
    return ConditionalPair(depth=depth, values=support, w0=full0, w1=full1)


def save_population(pop: Population, c: BinaryChannel, seed: int) -> str:
    """Header (size, depth, seed, channel) plus tagged sample blocks.

    The live generator state is not serialized; loading re-derives the
    stream from the recorded seed.
    """
    head = [f"n {pop.size}", f"depth {pop.depth}", f"seed {seed}",
            f"p00 {fmt_float(c.p00)}", f"p01 {fmt_float(c.p01)}",
            f"p10 {fmt_float(c.p10)}", f"p11 {fmt_float(c.p11)}"]
    body = ["samples0"] + [fmt_float(x) for x in pop.samples0]
    body += ["samples1"] + [fmt_float(x) for x in pop.samples1]
    return "\n".join(head + body) + "\n"


def load_population(text: str) -> tuple:
    """Inverse of :func:`save_population`.

    Returns
    -------
    (Population, BinaryChannel, seed)
    """
    header = {}
    samples = {"samples0": [], "samples1": []}
    current = None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line in samples:
            current = line
            continue
        if current is None:
            key, value = line.split()
            header[key] = value
        else:
            samples[current].append(float(line))
    c = BinaryChannel(p00=float(header["p00"]), p01=float(header["p01"]),
                      p10=float(header["p10"]), p11=float(header["p11"]))
    seed = int(header["seed"])
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    pop = Population(depth=int(header["depth"]),
                     samples0=np.array(samples["samples0"]),
                     samples1=np.array(samples["samples1"]), rng=rng)
    if pop.size != int(header["n"]):
        raise InvalidParameter("sample count does not match the recorded size")
    return pop, c, seed


def config_comment(config: dict) -> str:
    """Run configuration as ``#``-prefixed canonical JSON lines."""
    return "\n".join("# " + line for line in canonical_json(config).splitlines())


def curve_csv(rows: list, config: dict) -> str:
    """Diagnostic-vs-depth curve as CSV with the config in comments.

    ``rows`` is a list of dicts sharing one key set; the known diagnostic
    columns come in a fixed order (depth, tv, mean_gap, var_A, their
    standard errors, infinite-mass fractions), any extras after them in
    sorted order.
    """
    if not rows:
        raise InvalidParameter("curve needs at least one row")
    preferred = ["depth", "tv", "se_tv", "mean_gap", "se_mean_gap",
                 "var_A", "se_var_A", "inf_mass0", "inf_mass1"]
    keys = [key for key in preferred if key in rows[0]]
    keys += sorted(set(rows[0]) - set(keys))
    lines = [config_comment(config), ",".join(keys)]
    for row in rows:
        cells = []
        for key in keys:
            value = row[key]
            cells.append(str(int(value)) if key == "depth" else fmt_float(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def coupling_csv(coupling: Coupling, config: dict) -> str:
    """Coupling pairs as ``y0,y1,weight`` CSV with the config in comments."""
    lines = [config_comment(config), "y0,y1,weight"]
    for a, b, w in zip(coupling.y0, coupling.y1, coupling.weight):
        lines.append(f"{fmt_float(a)},{fmt_float(b)},{fmt_float(w)}")
    return "\n".join(lines) + "\n"


def report_json(payload: dict) -> str:
    """Canonical JSON document (trailing newline included)."""
    return canonical_json(payload) + "\n"
