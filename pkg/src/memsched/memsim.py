"""Downstream consequences of a schedule: arena offsets and off-chip traffic.

The arena model materializes concat outputs (first-fit offsets need plain
intervals, not aliasing constraints), so arena_size may legitimately exceed
the footprint model's peak. The traffic model keeps the footprint-model
tensors and evicts with full knowledge of the schedule (farthest next use).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import Graph, GraphError

INFINITY = float("inf")


@dataclass
class ArenaAssignment:
    offsets: dict[int | str, tuple[int, int]]  # node id or group id -> (offset, size)
    arena_size: int


@dataclass
class TrafficReport:
    capacity: int
    bytes_written_offchip: int = 0
    bytes_read_offchip: int = 0
    spill_events: int = 0


@dataclass
class _Buffer:
    key: int | str
    size: int
    start: int  # step producing the buffer (input tensors: 0, pre-execution)
    end: float  # last step reading it (inf = held to the end)


def _arena_buffers(order: list[int], g: Graph) -> list[_Buffer]:
    """Materialized-lifetime buffers: concat copies, direct-consumer lifetimes."""
    pos = {nid: i for i, nid in enumerate(order)}
    buffers = []
    done_groups = set()
    for nid in order:
        node = g.nodes[nid]
        if node.alloc_group is not None:
            grp = g.groups[node.alloc_group]
            if node.alloc_group in done_groups:
                continue
            done_groups.add(node.alloc_group)
            start = min(pos[m] for m in grp.members | {grp.representative})
            rep_succs = g.succs[grp.representative]
            end = max((pos[s] for s in rep_succs), default=INFINITY)
            if not rep_succs:
                end = INFINITY
            buffers.append(_Buffer(node.alloc_group, grp.total_bytes, start, end))
            continue
        size = node.logical_bytes  # concat materialized: full copy
        start = 0 if node.op == "input" else pos[nid]
        succs = g.succs[nid]
        end = max((pos[s] for s in succs), default=INFINITY)
        if not succs:
            end = INFINITY
        buffers.append(_Buffer(nid, size, start, end))
    return buffers


def arena_assign(order: list[int], g: Graph) -> ArenaAssignment:
    """First-fit linear arena: lowest non-overlapping offset, allocation order."""
    buffers = _arena_buffers(order, g)
    buffers.sort(key=lambda b: (b.start, str(b.key)))
    placed: list[tuple[int, int, _Buffer]] = []  # (offset, size, buffer)
    offsets: dict[int | str, tuple[int, int]] = {}
    for b in buffers:
        overlapping = sorted(
            (off, size)
            for off, size, other in placed
            if not (other.end < b.start or b.end < other.start)
        )
        off = 0
        for o_off, o_size in overlapping:
            if off + b.size <= o_off:
                break
            off = max(off, o_off + o_size)
        placed.append((off, b.size, b))
        offsets[b.key] = (off, b.size)
    arena_size = max((off + size for off, size, _ in placed), default=0)
    return ArenaAssignment(offsets=offsets, arena_size=arena_size)


# -- clairvoyant off-chip traffic ---------------------------------------------


@dataclass
class _Tensor:
    key: int | str
    size: int
    produced: int  # step index; -1 for graph inputs resident from the start
    uses: list[int] = field(default_factory=list)
    die: float = INFINITY


def _traffic_tensors(order: list[int], g: Graph) -> tuple[list[_Tensor], dict]:
    """Footprint-model tensors with their read steps and death steps."""
    pos = {nid: i for i, nid in enumerate(order)}
    tensors: dict[int | str, _Tensor] = {}

    def die_step(nid: int) -> float:
        if g.is_immortal(nid):
            return INFINITY
        eff = g.effective_consumers(nid)
        return max(pos[c] for c in eff) if eff else INFINITY

    for nid in order:
        node = g.nodes[nid]
        if node.alloc_group is not None:
            grp = g.groups[node.alloc_group]
            gid = node.alloc_group
            if gid not in tensors:
                start = min(pos[m] for m in grp.members | {grp.representative})
                tensors[gid] = _Tensor(
                    key=gid,
                    size=grp.total_bytes,
                    produced=start,
                    die=die_step(grp.representative),
                )
            continue
        if g.is_view(nid):
            continue  # views own no bytes; their inputs are read directly
        tensors[nid] = _Tensor(
            key=nid,
            size=g.tensor_bytes(nid),
            produced=-1 if node.op == "input" else pos[nid],
            die=die_step(nid),
        )

    def real_inputs(nid: int) -> list[int | str]:
        """Tensors an executing node reads: view preds expand to their inputs."""
        out: list[int | str] = []
        stack = list(g.preds[nid])
        while stack:
            p = stack.pop()
            node_p = g.nodes[p]
            if g.is_view(p):
                stack.extend(g.preds[p])
            elif node_p.alloc_group is not None:
                key = node_p.alloc_group
                if key not in out:
                    out.append(key)
            elif p not in out:
                out.append(p)
        return out

    reads: dict[int, list[int | str]] = {}
    for nid in order:
        ins = real_inputs(nid)
        reads[nid] = ins
        for key in ins:
            tensors[key].uses.append(pos[nid])
    for t in tensors.values():
        t.uses.sort()
    return list(tensors.values()), reads


def belady_traffic(order: list[int], g: Graph, capacity: int) -> TrafficReport:
    """Clairvoyant simulation: evict the resident tensor used farthest ahead.

    The first eviction of a still-live tensor writes it off-chip; every
    re-fault reads it back; dead tensors drop for free.
    """
    tensor_list, reads = _traffic_tensors(order, g)
    tensors = {t.key: t for t in tensor_list}
    pos = {nid: i for i, nid in enumerate(order)}
    report = TrafficReport(capacity=capacity)

    resident: dict[int | str, int] = {}  # key -> size
    written: set[int | str] = set()

    def next_use(key: int | str, after: int) -> float:
        t = tensors[key]
        for u in t.uses:
            if u > after:
                return u
        return INFINITY

    def evict_until(need: int, step: int, pinned: set[int | str]) -> None:
        while sum(resident.values()) + need > capacity:
            victims = [k for k in resident if k not in pinned]
            if not victims:
                raise GraphError(
                    f"node working set exceeds capacity at step {step} "
                    f"(node {order[step] if 0 <= step < len(order) else '?'})"
                )
            victim = max(victims, key=lambda k: (next_use(k, step), str(k)))
            size = resident.pop(victim)
            if tensors[victim].die > step:  # still live: spill
                report.spill_events += 1
                if victim not in written:
                    written.add(victim)
                    report.bytes_written_offchip += size

    # Graph inputs are resident up front; shed overflow before the first step.
    for t in sorted(tensor_list, key=lambda t: str(t.key)):
        if t.produced == -1:
            evict_until(t.size, -1, pinned=set())
            resident[t.key] = t.size

    own_buffer: dict[int, tuple[int | str, int] | None] = {}
    for nid in order:
        node = g.nodes[nid]
        if node.alloc_group is not None:
            own_buffer[nid] = (node.alloc_group, g.groups[node.alloc_group].total_bytes)
        elif g.is_view(nid) or node.op == "input":
            own_buffer[nid] = None
        else:
            own_buffer[nid] = (nid, g.tensor_bytes(nid))

    for step, nid in enumerate(order):
        pinned: set[int | str] = set(reads[nid])
        out = own_buffer[nid]
        if out is not None:
            pinned.add(out[0])
        # fault in missing inputs
        for key in reads[nid]:
            if key not in resident:
                evict_until(tensors[key].size, step, pinned & set(resident))
                resident[key] = tensors[key].size
                report.bytes_read_offchip += tensors[key].size
        # allocate (or re-fault, for shared group buffers) the output
        if out is not None and out[0] not in resident:
            evict_until(out[1], step, pinned & set(resident))
            resident[out[0]] = out[1]
            if out[0] in written:
                report.bytes_read_offchip += out[1]
        # drop dead tensors
        for key in [k for k in resident if tensors[k].die <= step]:
            del resident[key]
    return report
