"""Independent reference implementations the tests compare against.

They are written from the stated rules, not from the package code, and
favor brute force over cleverness.
"""

from __future__ import annotations

import random
import string
from fractions import Fraction

from docs2oas.ingest import PAGE_CONTAINERS, DomTree, text_content

# ---------------------------------------------------------------------------
# random JSON documents
# ---------------------------------------------------------------------------


def _key(rng: random.Random) -> str:
    pool = string.ascii_lowercase + "_"
    k = "".join(rng.choice(pool) for _ in range(rng.randint(1, 8)))
    if rng.random() < 0.05:
        k += rng.choice(["/x", "~y", " z", "ü"])
    return k


def random_json(rng: random.Random, max_depth: int = 4, max_keys: int = 60):
    """A JSON value of nesting depth <= ``max_depth`` holding <= ``max_keys`` object keys."""
    budget = [max_keys]

    def scalar():
        return rng.choice([
            None, True, False, rng.randint(-1000, 1000), round(rng.uniform(-50, 50), 3),
            float(rng.randint(0, 9)), "".join(rng.choice(string.ascii_letters) for _ in range(rng.randint(0, 6))),
        ])

    def value(depth: int):
        roll = rng.random()
        if depth >= max_depth or roll < 0.45:
            return scalar()
        if roll < 0.75 and budget[0] > 0:
            n = min(budget[0], rng.randint(0, 7))
            budget[0] -= n
            return {_key(rng): value(depth + 1) for _ in range(n)}
        n = rng.randint(0, 4)
        if rng.random() < 0.5 and budget[0] > 0:
            # homogeneous-ish objects, the common API shape
            keys = [_key(rng) for _ in range(min(budget[0], rng.randint(1, 4)))]
            budget[0] -= len(keys)
            return [{k: value(depth + 2) for k in keys if rng.random() < 0.8} for _ in range(n)]
        return [value(depth + 1) for _ in range(n)]

    top = rng.random()
    if top < 0.85:
        n = min(budget[0], rng.randint(1, 12))
        budget[0] -= n
        return {_key(rng): value(1) for _ in range(n)}
    return value(0)


# ---------------------------------------------------------------------------
# brute-force schema inference
# ---------------------------------------------------------------------------


def _kind(v) -> str | None:
    if v is None:
        return None
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, int):
        return "integer"
    if isinstance(v, float):
        return "integer" if v.is_integer() else "number"
    if isinstance(v, str):
        return "string"
    if isinstance(v, list):
        return "array"
    return "object"


def _fold_kinds(kinds: list[str]) -> str | None:
    """First observed type wins; integer and number together widen to number."""
    out = None
    for k in kinds:
        if out is None:
            out = k
        elif {out, k} == {"integer", "number"}:
            out = "number"
    return out


def oracle_schema(observations: list) -> dict | None:
    """Schema for every value ever seen at one position of the document.

    Returns ``None`` when nothing was observed (items of empty arrays).
    """
    if not observations:
        return None
    kinds = [_kind(v) for v in observations]
    kind = _fold_kinds([k for k in kinds if k is not None])
    out: dict = {"type": kind or "string"}
    if any(k is None for k in kinds):
        out["nullable"] = True
    if kind == "object":
        objs = [v for v in observations if isinstance(v, dict)]
        keys: list[str] = []
        for o in objs:
            keys += [k for k in o if k not in keys]
        out["properties"] = {k: oracle_schema([o[k] for o in objs if k in o]) for k in keys}
        out["required"] = sorted(set.intersection(*(set(o) for o in objs)))
    elif kind == "array":
        elems = [e for v in observations if isinstance(v, list) for e in v]
        out["items"] = oracle_schema(elems) or {}
    return out


def infer_oracle(document) -> dict:
    return oracle_schema([document])


# ---------------------------------------------------------------------------
# minimal ancestor
# ---------------------------------------------------------------------------


def _subtree_ids(tree: DomTree, node_id: int) -> set[int]:
    return {n.node_id for n in tree.node(node_id).iter()}


def multi_scope_oracle(tree: DomTree, target_id: int, example_ids: set[int], other_ids: list[int]) -> tuple[int, ...]:
    """Enumerate every element, keep those holding the target and no other
    request, pick the largest, then apply the sibling-run rule."""
    holders = []
    for node in tree.elements():
        if node.tag in PAGE_CONTAINERS:
            continue
        ids = _subtree_ids(tree, node.node_id)
        if target_id in ids and not any(o in ids for o in other_ids):
            holders.append((len(ids), node.node_id))
    # the largest holder is the highest ancestor; ties cannot happen on a chain
    best = max(holders)[1]
    own_text = "".join(
        n.text for n in tree.node(best).iter()
        if not n.hidden and not any(n.node_id in _subtree_ids(tree, e) for e in example_ids)
    ).strip()
    if own_text:
        return (best,)
    parent = tree.parent(tree.node(best))
    siblings = [c for c in parent.children if not c.hidden]
    start = [c.node_id for c in siblings].index(best)
    run = []
    for sib in siblings[start:]:
        if sib.node_id != best and any(o in _subtree_ids(tree, sib.node_id) for o in other_ids):
            break
        run.append(sib.node_id)
    return tuple(run)


def single_candidates_oracle(tree: DomTree, seeds: list[int], endpoint_leaves: list[int],
                             name_leaves: dict[int, str], method_leaves: list[int]) -> list[dict]:
    """Every element that is the first endpoint-holding ancestor of some seed leaf."""
    out = {}
    for node in tree.elements():
        ids = _subtree_ids(tree, node.node_id)
        if not any(e in ids for e in endpoint_leaves):
            continue
        for s in seeds:
            if s not in ids or s == node.node_id:
                continue
            # node must be the *first* such ancestor of s: no strict descendant
            # of node that is an ancestor of s may hold an endpoint leaf
            chain = [a.node_id for a in tree.ancestors(tree.node(s))]
            below = chain[: chain.index(node.node_id)]
            if any(any(e in _subtree_ids(tree, b) for e in endpoint_leaves) for b in below):
                continue
            hits = {name_leaves[l] for l in name_leaves if l in ids}
            out[node.node_id] = {
                "anchor": node.node_id,
                "rank": (len(hits), any(m in ids for m in method_leaves)),
                "ids": ids,
            }
    return list(out.values())


def select_oracle(cands: list[dict], seed: int) -> int:
    alive = [c for c in cands if not any(c["anchor"] != d["anchor"] and d["anchor"] in c["ids"] for d in cands)]
    best = max(c["rank"] for c in alive)
    tied = sorted(c["anchor"] for c in alive if c["rank"] == best)
    return tied[int(random.Random(seed).random() * len(tied))]


# ---------------------------------------------------------------------------
# ICL ranking
# ---------------------------------------------------------------------------


def exact_cosine_sq(a: dict[str, int], b: dict[str, int]) -> Fraction:
    """Squared cosine as an exact fraction, so rankings have no float ties."""
    dot = sum(a[t] * b.get(t, 0) for t in a)
    na = sum(v * v for v in a.values())
    nb = sum(v * v for v in b.values())
    return Fraction(dot * dot, na * nb)


def brute_force_ranking(query: dict[str, int], library: list[tuple[str, dict[str, int]]], k: int) -> list[str]:
    scored = []
    for ex_id, hist in library:
        scored.append((-exact_cosine_sq(query, hist), ex_id))
    scored.sort()
    return [ex_id for _s, ex_id in scored[:k]]


# ---------------------------------------------------------------------------
# random DOMs with planted examples
# ---------------------------------------------------------------------------

FILLER = ["Overview of the call.", "Returns the object.", "See also the guides.", "Rate limits apply."]


def planted_multi_page(rng: random.Random, n_pairs: int) -> tuple[str, list[str]]:
    """Random nesting of wrappers holding ``n_pairs`` request/response blocks.

    Returns the HTML and the request command strings in document order.
    """
    commands = [f"curl https://api.example.com/v1/r{i}/items?limit={i}" for i in range(n_pairs)]
    blocks = []
    for i, cmd in enumerate(commands):
        req = f"<pre>{cmd}</pre>"
        resp = f'<pre>{{"id": {i}, "name": "n{i}"}}</pre>'
        parts = [req, resp]
        if rng.random() < 0.6:
            parts.insert(0, f"<h2>Endpoint {i}</h2>")
        if rng.random() < 0.6:
            parts.append(f"<p>{rng.choice(FILLER)}</p><table><tr><td>limit</td><td>integer</td></tr></table>")
        style = rng.random()
        if style < 0.35:
            blocks.append("<section>" + "".join(parts) + "</section>")
        elif style < 0.6:
            inner = "<div>" + "".join(parts[:2]) + "</div>"
            blocks.append("<div><div>" + inner + "</div>" + "".join(parts[2:]) + "</div>")
        elif style < 0.8:
            blocks.append("".join(parts))  # flat siblings
        else:
            blocks.append('<div class="code"><div>' + req + "</div>" + resp + "</div>")
    # wrap groups of blocks in extra containers at random
    html = ""
    i = 0
    while i < len(blocks):
        take = rng.randint(1, 2)
        group = "".join(blocks[i:i + take])
        html += f"<div>{group}</div>" if rng.random() < 0.4 else group
        i += take
    return f"<html><body><main>{html}</main></body></html>", commands


def planted_single_page(rng: random.Random) -> str:
    """One request with parameter tables scattered over a random layout."""
    names = ["limit", "offset", "cursor", "status", "sort"]
    rng.shuffle(names)
    used = names[: rng.randint(2, 4)]
    query = "&".join(f"{n}=1" for n in used)
    cmd = f"curl https://api.example.com/v2/widgets/9?{query}"
    table = "<table>" + "".join(f"<tr><td>{n}</td><td>integer</td></tr>" for n in used[: rng.randint(1, len(used))]) + "</table>"
    head = rng.choice(["<h1><code>GET</code> <code>/v2/widgets/{id}</code></h1>",
                       "<p><span>GET</span> <span>/v2/widgets/{id}</span></p>",
                       "<div><p>GET /v2/widgets/{id}</p></div>"])
    second = "<div><h3>Query parameters</h3>" + table + "</div>" if rng.random() < 0.5 else ""
    extra = "<aside><p>limit</p><p>GET /v2/widgets/{id}</p></aside>" if rng.random() < 0.4 else ""
    layout = rng.random()
    samples = f"<div><pre>{cmd}</pre><pre>{{\"id\": 9, \"{used[0]}\": 1}}</pre></div>"
    if layout < 0.5:
        body = f"<article>{head}<h3>Parameters</h3>{table}{second}</article>{samples}{extra}"
    else:
        body = f"<div><div>{head}</div><section><div>{table}</div></section>{second}</div>{samples}{extra}"
    return f"<html><body><nav><p>Docs</p></nav><main>{body}</main></body></html>"


def visible_text(tree: DomTree) -> str:
    return text_content(tree.root)


# ---------------------------------------------------------------------------
# query fragments for ICL selection
# ---------------------------------------------------------------------------

_FRAGMENT_TAGS = ["table", "tr", "td", "th", "dl", "dt", "dd", "ul", "li", "p", "code", "div", "span", "h3", "em"]


def random_fragment(rng: random.Random) -> str:
    """Nested markup drawn from documentation-ish tags, 1..25 elements."""
    budget = [rng.randint(1, 25)]

    def build(depth: int) -> str:
        if budget[0] <= 0:
            return "x"
        budget[0] -= 1
        tag = rng.choice(_FRAGMENT_TAGS)
        kids = "".join(build(depth + 1) for _ in range(rng.randint(0, 3 if depth < 4 else 0)))
        return f"<{tag}>{kids or 'text'}</{tag}>"

    return "<div>" + build(0) + "</div>"
