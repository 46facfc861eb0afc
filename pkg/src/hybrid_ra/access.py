"""Protocol engine for one random-access slot.

Two code paths compute the same thing:

* the object path (``generate_rars`` -> ``allocate_msg3`` -> ``sic_decode``,
  composed by ``ihra_slot``) follows the message flow device by device;
* ``ihra_mmtc_counts`` is a vectorized kernel used by the experiment runner.

Both consume the generator in the same order (one uniform per device for the
distance, one for the preamble, then two per device for the MSG3 resource
block and power level), so for one seed they produce identical outcomes.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidConfigError, InvalidInputError
from .prach import detect_occupancy, preamble_from_uniform, select_preambles
from .traffic import activate_mmtc

POLICIES = ("ihra", "ihra-random")


def _check_policy(policy):
    if policy not in POLICIES:
        raise InvalidConfigError(f"unknown policy {policy!r}; expected one of {POLICIES}", "policy")


def _check_levels(levels):
    if levels < 1:
        raise InvalidConfigError(f"number of power levels must be >= 1, got {levels}", "L")


@dataclass(frozen=True)
class Rar:
    preamble: int
    ta_index: int
    resource_block: int


@dataclass(frozen=True)
class Msg3Transmission:
    device_id: int
    resource_block: int
    power_level: int
    matched: bool


@dataclass
class RbLoad:
    """Devices transmitting on one resource block, keyed by power level (1..levels)."""

    levels: int
    by_level: dict = field(default_factory=dict)
    resource_block: int | None = None

    def add(self, level, device_id):
        if not 1 <= level <= self.levels:
            raise InvalidInputError(f"power level {level} outside 1..{self.levels}")
        self.by_level.setdefault(level, []).append(device_id)

    def occupancy(self, level):
        return len(self.by_level.get(level, ()))


@dataclass
class SlotOutcome:
    mmtc_success: int = 0
    mmtc_failed_no_rar: int = 0
    mmtc_failed_collision: int = 0
    urllc_success: int = 0
    urllc_actual: int = 0
    urllc_predicted: int = 0

    @property
    def mmtc_active(self):
        return self.mmtc_success + self.mmtc_failed_no_rar + self.mmtc_failed_collision

    @property
    def total_success(self):
        return self.mmtc_success + self.urllc_success


def generate_rars(occupancy):
    """One RAR per singleton (preamble, ring) cell, RBs numbered in (r, i) order."""
    rs, is_ = np.nonzero(occupancy.counts == 1)
    return [Rar(int(r) + 1, int(i) + 1, rb) for rb, (r, i) in enumerate(zip(rs, is_))]


def _random_level_cap(policy, levels, unmatched_top_level):
    # under IHRA the top level is reserved for TA-matched devices
    if policy == "ihra" and not unmatched_top_level and levels > 1:
        return levels - 1
    return levels


def allocate_msg3(assignment, rars, policy, levels, rng, unmatched_top_level=False):
    """MSG3 resource block and power level of one device, or None without a RAR.

    Under ``"ihra"`` a TA-matched device sends on its own RAR's resource block
    at the top level ``levels``; an unmatched device picks one of its
    preamble's resource blocks and a level in ``1..levels-1`` (``1..levels``
    with ``unmatched_top_level=True``). Under ``"ihra-random"`` every device
    draws its level from ``1..levels``.

    Always consumes two uniforms (resource block, then power level) so that
    the generator stream does not depend on which branch is taken.
    """
    _check_policy(policy)
    _check_levels(levels)
    u_rb, u_level = rng.random(2)
    own = [x for x in rars if x.preamble == assignment.preamble]
    if not own:
        return None
    match = next((x for x in own if x.ta_index == assignment.ta_index), None)
    if match is not None:
        rb, matched = match.resource_block, True
    else:
        rb, matched = own[min(int(u_rb * len(own)), len(own) - 1)].resource_block, False
    if matched and policy == "ihra":
        level = levels
    else:
        cap = _random_level_cap(policy, levels, unmatched_top_level)
        level = min(int(u_level * cap), cap - 1) + 1
    return Msg3Transmission(assignment.device_id, rb, level, matched)


def group_rb_loads(transmissions, levels):
    loads = {}
    for tx in transmissions:
        if tx.resource_block not in loads:
            loads[tx.resource_block] = RbLoad(levels, resource_block=tx.resource_block)
        loads[tx.resource_block].add(tx.power_level, tx.device_id)
    return loads


def sic_decode(load):
    """Devices recovered by successive interference cancellation on one RB.

    Levels are scanned from highest to lowest; an empty level is skipped, a
    lone device is decoded and cancelled, and a level collision stops the scan.
    """
    decoded = set()
    for level in range(load.levels, 0, -1):
        devices = load.by_level.get(level, ())
        if len(devices) >= 2:
            break
        decoded.update(devices)
    return decoded


def urllc_round(predicted, actual):
    """URLLC devices served when multi-user detection is sized for ``predicted``."""
    if predicted < 0 or actual < 0:
        raise InvalidInputError("URLLC counts must be non-negative")
    return min(predicted, actual)


def ihra_slot(geometry, num_preambles, levels, population, urllc_actual, urllc_predicted, policy, rng,
              miss_probability=0.0, unmatched_top_level=False):
    _check_policy(policy)
    _check_levels(levels)
    assignments = select_preambles(population, num_preambles, rng, annuli=geometry.annuli)
    occupancy = detect_occupancy(assignments, num_preambles, geometry.annuli, miss_probability, rng)
    rars = generate_rars(occupancy)
    by_preamble = defaultdict(list)
    for rar in rars:
        by_preamble[rar.preamble].append(rar)

    transmissions = []
    no_rar = 0
    for a in assignments:
        tx = allocate_msg3(a, by_preamble.get(a.preamble, ()), policy, levels, rng, unmatched_top_level)
        if tx is None:
            no_rar += 1
        else:
            transmissions.append(tx)

    decoded = 0
    for load in group_rb_loads(transmissions, levels).values():
        decoded += len(sic_decode(load))
    return SlotOutcome(
        mmtc_success=decoded,
        mmtc_failed_no_rar=no_rar,
        mmtc_failed_collision=len(transmissions) - decoded,
        urllc_success=urllc_round(urllc_predicted, urllc_actual),
        urllc_actual=urllc_actual,
        urllc_predicted=urllc_predicted,
    )


def ihra_mmtc_counts(geometry, num_preambles, levels, count, policy, rng, unmatched_top_level=False):
    """Vectorized mMTC part of one IHRA slot, including device placement.

    Returns ``(success, failed_no_rar, failed_collision)``. Draws from ``rng``
    exactly as ``activate_mmtc`` followed by ``ihra_slot`` would.
    """
    _check_policy(policy)
    _check_levels(levels)
    if num_preambles < 1:
        raise InvalidConfigError(f"num_preambles must be >= 1, got {num_preambles}", "num_preambles")
    if count == 0:
        return 0, 0, 0
    zeta = geometry.annuli
    dist = geometry.cell_radius_m * np.sqrt(rng.random(count))
    ta = geometry.ta_index(dist)
    pre = preamble_from_uniform(rng.random(count), num_preambles)
    u = rng.random((count, 2))

    cell = (pre - 1) * zeta + (ta - 1)
    counts = np.bincount(cell, minlength=num_preambles * zeta)
    singleton = counts == 1
    rb_of_cell = np.cumsum(singleton) - 1
    rars_per_pre = singleton.reshape(num_preambles, zeta).sum(axis=1)
    first_rb = np.concatenate(([0], np.cumsum(rars_per_pre)[:-1]))

    n_rars = rars_per_pre[pre - 1]
    has_rar = n_rars > 0
    matched = singleton[cell]
    pick = np.minimum((u[:, 0] * n_rars).astype(np.int64), np.maximum(n_rars - 1, 0))
    rb = np.where(matched, rb_of_cell[cell], first_rb[pre - 1] + pick)
    cap = _random_level_cap(policy, levels, unmatched_top_level)
    level = np.minimum((u[:, 1] * cap).astype(np.int64), cap - 1) + 1
    if policy == "ihra":
        level = np.where(matched, levels, level)

    n_rb = int(singleton.sum())
    key = rb[has_rar] * levels + (level[has_rar] - 1)
    occ = np.bincount(key, minlength=n_rb * levels).reshape(n_rb, levels)[:, ::-1]
    # a level decodes iff it is a singleton and every level above holds <= 1 device
    clear_above = np.cumprod(occ <= 1, axis=1)
    clear_above = np.concatenate((np.ones((n_rb, 1), dtype=clear_above.dtype), clear_above[:, :-1]), axis=1)
    success = int(((occ == 1) & (clear_above == 1)).sum())
    no_rar = int(count - has_rar.sum())
    return success, no_rar, count - no_rar - success


def tara_success_mask(total_devices, num_preambles, rng):
    """Per-device success in the four-message baseline: the preamble was unique."""
    if total_devices < 0:
        raise InvalidInputError(f"total_devices must be >= 0, got {total_devices}")
    if num_preambles < 1:
        raise InvalidConfigError(f"num_preambles must be >= 1, got {num_preambles}", "num_preambles")
    pre = preamble_from_uniform(rng.random(total_devices), num_preambles)
    return np.bincount(pre, minlength=num_preambles + 1)[pre] == 1


def tara_slot(total_devices, num_preambles, rng):
    return int(tara_success_mask(total_devices, num_preambles, rng).sum())


def tara_expected_successes(total_devices, num_preambles):
    return total_devices * (1 - 1 / num_preambles) ** (total_devices - 1) if total_devices else 0.0
