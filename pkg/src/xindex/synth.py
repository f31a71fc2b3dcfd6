"""Deterministic synthetic corpora with hyperprolific (HP) and long-range-influence (TA) scholars.

Background scholars live in planted communities: co-authors come from the
lead author's community except with probability
``inter_community_edge_prob``, and references favour the citing paper's
community.  Archetype scholars receive citations through a separate
channel whose ``citation_radius`` is the share of citing papers drawn from
*other* communities: small for HP (local attention), large for TA.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import PaperRecord


@dataclass(frozen=True)
class ArchetypeProfile:
    count: int
    papers_per_year: int
    citations_per_paper: float
    citation_radius: float
    group_size: int = 6
    coauthors: tuple[int, int] = (1, 3)


def default_hp_profile() -> ArchetypeProfile:
    return ArchetypeProfile(count=8, papers_per_year=80, citations_per_paper=1.0, citation_radius=0.05, group_size=12)


def default_ta_profile() -> ArchetypeProfile:
    return ArchetypeProfile(count=8, papers_per_year=2, citations_per_paper=25.0, citation_radius=0.9, group_size=4,
                            coauthors=(1, 2))


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    start_year: int = 2006
    end_year: int = 2015
    n_background_authors: int = 1500
    background_papers_per_year: int = 600
    community_count: int = 8
    inter_community_edge_prob: float = 0.05
    authors_per_paper: tuple[int, int] = (1, 4)
    references_per_paper: int = 8
    local_citation_prob: float = 0.7
    hp_profile: ArchetypeProfile = field(default_factory=default_hp_profile)
    ta_profile: ArchetypeProfile = field(default_factory=default_ta_profile)

    @property
    def years(self) -> range:
        return range(self.start_year, self.end_year + 1)

    def validate(self) -> None:
        if self.community_count < 1:
            raise ValueError("community_count must be >= 1")
        if self.n_background_authors < self.community_count:
            raise ValueError("need at least one background author per community")
        if self.end_year < self.start_year:
            raise ValueError("end_year before start_year")
        lo, hi = self.authors_per_paper
        if not 1 <= lo <= hi:
            raise ValueError("authors_per_paper must satisfy 1 <= min <= max")
        for name in ("inter_community_edge_prob", "local_citation_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.background_papers_per_year < 1:
            raise ValueError("background_papers_per_year must be >= 1")
        if self.references_per_paper < 0:
            raise ValueError("references_per_paper must be >= 0")
        for label, prof in (("hp", self.hp_profile), ("ta", self.ta_profile)):
            if prof.count < 0 or prof.citations_per_paper < 0:
                raise ValueError(f"{label} profile counts must be non-negative")
            if prof.count and prof.papers_per_year < 1:
                raise ValueError(f"{label} papers_per_year must be >= 1")
            if not 0.0 <= prof.citation_radius <= 1.0:
                raise ValueError(f"{label} citation_radius must lie in [0, 1]")
            if prof.count and self.community_count < 2 and prof.citation_radius > 0:
                raise ValueError(f"{label} citation_radius > 0 needs at least two communities")
        if self.hp_profile.count and self.hp_profile.papers_per_year < 72:
            raise ValueError("hyperprolific profile needs papers_per_year >= 72")


def hp_author_ids(config: SynthConfig) -> list[str]:
    return [f"hp{i:03d}" for i in range(config.hp_profile.count)]


def ta_author_ids(config: SynthConfig) -> list[str]:
    return [f"ta{i:03d}" for i in range(config.ta_profile.count)]


class _Builder:
    def __init__(self, config: SynthConfig):
        self.cfg = config
        self.rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x5EED]))
        C = config.community_count
        self.bg = [f"bg{i:06d}" for i in range(config.n_background_authors)]
        self.members = [np.arange(c, config.n_background_authors, C) for c in range(C)]
        self.ids: list[str] = []
        self.years: list[int] = []
        self.authors: list[list[str]] = []
        self.refs: list[list[int]] = []
        self.community: list[int] = []
        self.owner: list[str | None] = []

    def _pick_member(self, c: int) -> str:
        m = self.members[c]
        return self.bg[int(m[self.rng.integers(len(m))])]

    def _other_community(self, c: int) -> int:
        C = self.cfg.community_count
        if C == 1:
            return c
        return int((c + self.rng.integers(1, C)) % C)

    def add_paper(self, year: int, authors: list[str], community: int, owner: str | None = None) -> int:
        k = len(self.ids)
        self.ids.append(f"P{year}-{k:07d}")
        self.years.append(year)
        self.authors.append(authors)
        self.refs.append([])
        self.community.append(community)
        self.owner.append(owner)
        return k

    def background_paper(self, year: int) -> None:
        cfg = self.cfg
        c = int(self.rng.integers(cfg.community_count))
        n_auth = int(self.rng.integers(cfg.authors_per_paper[0], cfg.authors_per_paper[1] + 1))
        authors = [self._pick_member(c)]
        for _ in range(n_auth - 1):
            cc = self._other_community(c) if self.rng.random() < cfg.inter_community_edge_prob else c
            a = self._pick_member(cc)
            if a not in authors:
                authors.append(a)
        self.add_paper(year, authors, c)

    def archetype_groups(self, ids: list[str], prof: ArchetypeProfile, offset: int):
        groups = {}
        C = self.cfg.community_count
        for i, a in enumerate(ids):
            c = (i + offset) % C
            m = self.members[c]
            size = min(prof.group_size, len(m))
            picks = self.rng.choice(len(m), size=size, replace=False) if size else []
            groups[a] = (c, [self.bg[int(m[j])] for j in sorted(picks)])
        return groups

    def archetype_papers(self, year: int, groups, prof: ArchetypeProfile) -> None:
        lo, hi = prof.coauthors
        for a, (c, group) in groups.items():
            for _ in range(prof.papers_per_year):
                n_co = min(int(self.rng.integers(lo, hi + 1)), len(group))
                co = self.rng.choice(len(group), size=n_co, replace=False) if n_co else []
                self.add_paper(year, [a] + [group[int(j)] for j in sorted(co)], c, owner=a)


def _draw(rng: np.random.Generator, pool: np.ndarray, k: int) -> list[int]:
    if k <= 0 or len(pool) == 0:
        return []
    picks = pool[rng.integers(len(pool), size=k + 2)]
    return list(dict.fromkeys(int(p) for p in picks))[:k]


def generate_corpus(config: SynthConfig | None = None) -> list[PaperRecord]:
    """Generate the corpus; identical configs give identical record lists."""
    cfg = config or SynthConfig()
    cfg.validate()
    b = _Builder(cfg)
    rng = b.rng
    hp_groups = b.archetype_groups(hp_author_ids(cfg), cfg.hp_profile, 0)
    ta_groups = b.archetype_groups(ta_author_ids(cfg), cfg.ta_profile, cfg.community_count // 2)

    for y in cfg.years:
        for _ in range(cfg.background_papers_per_year):
            b.background_paper(y)
        b.archetype_papers(y, hp_groups, cfg.hp_profile)
        b.archetype_papers(y, ta_groups, cfg.ta_profile)

    years = np.array(b.years)
    comm = np.array(b.community)
    is_bg = np.array([o is None for o in b.owner])

    # background references: earlier background papers, community-biased
    first_idx = {y: int(np.searchsorted(years, y)) for y in cfg.years}
    for y in cfg.years:
        if y == cfg.start_year:
            continue
        earlier = np.flatnonzero(is_bg[:first_idx[y]])
        by_comm = [earlier[comm[earlier] == c] for c in range(cfg.community_count)]
        for k in range(first_idx[y], len(years)):
            if years[k] != y:
                break
            n_local = int(rng.binomial(cfg.references_per_paper, cfg.local_citation_prob))
            refs = _draw(rng, by_comm[comm[k]], n_local)
            refs += [r for r in _draw(rng, earlier, cfg.references_per_paper - n_local + 2) if r not in refs]
            b.refs[k] = refs[:cfg.references_per_paper]

    # archetype citations: citing papers from later years, near or far per citation_radius
    cache: dict[tuple, np.ndarray] = {}

    def citers(owner: str, c: int, y: int, far: bool) -> np.ndarray:
        key = (owner if not far else None, c, y, far)
        if key not in cache:
            later = years > y
            if far:
                cache[key] = np.flatnonzero(later & is_bg & (comm != c))
            else:
                own = np.array([o == owner for o in b.owner])
                cache[key] = np.flatnonzero(later & ((is_bg & (comm == c)) | own))
        return cache[key]

    for groups, prof in ((hp_groups, cfg.hp_profile), (ta_groups, cfg.ta_profile)):
        for k in range(len(b.ids)):
            owner = b.owner[k]
            if owner not in groups:
                continue
            n_cit = int(rng.poisson(prof.citations_per_paper))
            for _ in range(n_cit):
                far = rng.random() < prof.citation_radius
                pool = citers(owner, int(comm[k]), int(years[k]), far)
                if len(pool) == 0:
                    continue
                q = int(pool[rng.integers(len(pool))])
                if k not in b.refs[q]:
                    b.refs[q].append(k)

    return [
        PaperRecord(b.ids[k], b.years[k], tuple(b.authors[k]), tuple(b.ids[r] for r in b.refs[k]))
        for k in range(len(b.ids))
    ]


def generate_trajectories(
    n_scholars: int = 2000,
    breakout_fraction: float = 0.05,
    seed: int = 0,
    flag_share_breakout: float = 0.5,
    flag_share_background: float = 0.002,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ten-year cumulative x-index series for a mixed population.

    Breakout scholars start accruing earlier, grow faster and accelerate in
    years 6-10; a share of them (and a sliver of the background) is flagged,
    mimicking award winners.  Returns (series, is_breakout, is_flagged).
    """
    if not 0 <= breakout_fraction <= 1:
        raise ValueError("breakout_fraction must lie in [0, 1]")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x7A1]))
    n_break = int(round(n_scholars * breakout_fraction))
    is_break = np.zeros(n_scholars, dtype=bool)
    is_break[rng.choice(n_scholars, size=n_break, replace=False)] = True

    years = np.arange(1, 11)
    series = np.zeros((n_scholars, 10))
    for i in range(n_scholars):
        if is_break[i]:
            start = 1 if rng.random() < 0.94 else 2
            base = rng.lognormal(np.log(4.0), 0.25)
            growth = np.where(years <= 5, 1.0 + 0.25 * (years - 1), 2.0 + 0.8 * (years - 5))
        else:
            start = int(rng.choice([1, 2, 3], p=[0.55, 0.3, 0.15]))
            base = rng.lognormal(np.log(1.2), 0.25)
            growth = 1.0 + 0.08 * (years - 1)
        inc = base * growth * rng.gamma(8.0, 1 / 8.0, size=10)
        inc[years < start] = 0.0
        series[i] = np.cumsum(inc)

    flagged = np.where(is_break, rng.random(n_scholars) < flag_share_breakout,
                       rng.random(n_scholars) < flag_share_background)
    return series, is_break, flagged
