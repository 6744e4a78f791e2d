"""Seeded synthetic catalogs with a planted skill signal.

Every person gets a latent skill in [0, 1]; a title's rating is an affine map
of the role-weighted mean crew skill plus Gaussian noise.  Crew are drawn with
preferential attachment on accumulated credits, which yields hub-dominated
degree distributions.

People also belong to one of ``n_communities`` latent communities, and crews
are mostly recruited from the director's community.  Only director skill
depends on the community, so the collaboration graph carries information about
director skill while the skills of different roles on a title stay
independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .catalog import (
    ACTOR, AGENT, CASTING, DIRECTOR, WRITER,
    Catalog, CreditRecord, PersonRecord, TitleRecord,
)

GENRES = ("drama", "comedy", "thriller", "action", "romance", "crime", "horror",
          "documentary", "adventure", "sci-fi", "family", "animation")
GENRE_WEIGHTS = (24, 20, 10, 9, 8, 7, 5, 4, 4, 3, 3, 3)
LANGUAGES = ("english", "french", "spanish", "japanese", "german", "italian",
             "korean", "hindi", "russian", "portuguese")
LANGUAGE_WEIGHTS = (55, 10, 9, 7, 5, 4, 3, 3, 2, 2)
COUNTRY_OF = {"english": "usa", "french": "france", "spanish": "spain", "japanese": "japan",
              "german": "germany", "italian": "italy", "korean": "south korea",
              "hindi": "india", "russian": "russia", "portuguese": "brazil"}
AGE_RATINGS = ("G", "PG", "PG-13", "R", "NC-17")
AGE_WEIGHTS = (8, 22, 35, 30, 5)


@dataclass(frozen=True)
class SynthConfig:
    n_actors: int = 1500
    n_directors: int = 400
    n_casting_directors: int = 40
    n_writers: int = 300
    n_agents: int = 40
    n_titles: int = 2000
    actors_per_title: tuple = (4, 10)
    seed: int = 0
    w_director: float = 0.50
    w_casting: float = 0.25
    w_actor: float = 0.15
    w_writer: float = 0.10
    noise_sigma: float = 0.45
    popularity_exponent: float = 1.0
    n_communities: int = 10
    casting_affinity: float = 0.8
    actor_affinity: float = 0.6
    agent_affinity: float = 0.7
    community_skill_shape: tuple = (3.0, 0.8)
    director_skill_sd: float = 0.15
    casting_skill_shape: float = 12.0   # symmetric Beta(a, a)
    rating_offset: float = -1.2
    rating_scale: float = 10.5
    uniform_skill: Optional[float] = None
    year_range: tuple = (1975, 2020)
    series_share: float = 0.15

    def __post_init__(self):
        counts = ("n_actors", "n_directors", "n_casting_directors", "n_writers",
                  "n_agents", "n_titles")
        for name in counts:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        lo, hi = self.actors_per_title
        if not 1 <= lo <= hi:
            raise ValueError("actors_per_title must satisfy 1 <= min <= max")
        for name in ("w_director", "w_casting", "w_actor", "w_writer", "noise_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.popularity_exponent <= 0:
            raise ValueError("popularity_exponent must be > 0")
        if self.casting_skill_shape <= 0:
            raise ValueError("casting_skill_shape must be > 0")
        if self.n_communities < 1:
            raise ValueError("n_communities must be >= 1")
        for name in ("casting_affinity", "actor_affinity", "agent_affinity"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class TitleTrace:
    title_id: str
    community: int
    director: str
    casting: Optional[str]
    writer: Optional[str]
    actors: tuple
    score: float            # role-weighted mean skill, before the affine map
    latent_rating: float    # affine map + noise, before clamping and rounding


@dataclass
class GroundTruth:
    skill: dict = field(default_factory=dict)
    community: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)


class _Pool:
    """Preferential-attachment sampler over one role's people."""

    def __init__(self, ids, communities, exponent):
        self.ids = list(ids)
        self.community = np.asarray(communities, dtype=int)
        self.credits = np.zeros(len(self.ids))
        self.exponent = exponent

    def __len__(self):
        return len(self.ids)

    def draw(self, rng, k=1, community=None, affinity=0.0, exclude=()):
        chosen = []
        for _ in range(k):
            w = (self.credits + 1.0) ** self.exponent
            if exclude or chosen:
                idx = [i for i in (*exclude, *chosen)]
                w[idx] = 0.0
            if community is not None and rng.random() < affinity:
                local = np.where(self.community == community, w, 0.0)
                if local.sum() > 0:
                    w = local
            total = w.sum()
            if total <= 0:
                break
            i = int(rng.choice(len(w), p=w / total))
            chosen.append(i)
        for i in chosen:
            self.credits[i] += 1
        return chosen


def _id_format(prefix, n):
    width = max(3, len(str(max(n, 1))))
    return lambda i: f"{prefix}{i + 1:0{width}d}"


def community_levels(config: SynthConfig) -> np.ndarray:
    """Director skill centre of each community (left-skewed Beta quantiles)."""
    a, b = config.community_skill_shape
    c = config.n_communities
    return stats.beta.ppf((np.arange(c) + 0.5) / c, a, b)


def generate(config: SynthConfig = SynthConfig()):
    """Generate ``(catalog, ground_truth)``; deterministic given ``config.seed``."""
    cfg = config
    if cfg.n_titles > 0:
        for name, n in (("actor", cfg.n_actors), ("director", cfg.n_directors),
                        ("casting_director", cfg.n_casting_directors)):
            if n == 0:
                raise ValueError(f"n_titles > 0 requires at least one {name}")
    rng = np.random.default_rng(cfg.seed)
    n_comm = cfg.n_communities
    levels = community_levels(cfg)

    def skills_for(n, sampler):
        if cfg.uniform_skill is not None:
            return np.full(n, float(cfg.uniform_skill))
        return np.clip(sampler(n), 0.0, 1.0)

    def make_role(prefix, n):
        fmt = _id_format(prefix, n)
        ids = [fmt(i) for i in range(n)]
        # balanced community sizes keep title shares stable across seeds
        comm = rng.permutation(np.arange(n) % n_comm)
        return ids, comm

    d_ids, d_comm = make_role("d", cfg.n_directors)
    c_ids, c_comm = make_role("c", cfg.n_casting_directors)
    a_ids, a_comm = make_role("a", cfg.n_actors)
    w_ids, w_comm = make_role("w", cfg.n_writers)
    g_ids, g_comm = make_role("g", cfg.n_agents)

    d_skill = skills_for(cfg.n_directors,
                         lambda n: levels[d_comm] + rng.normal(0.0, cfg.director_skill_sd, n))
    c_skill = skills_for(cfg.n_casting_directors, lambda n: rng.beta(cfg.casting_skill_shape, cfg.casting_skill_shape, n))
    a_skill = skills_for(cfg.n_actors, lambda n: rng.beta(2.0, 2.0, n))
    w_skill = skills_for(cfg.n_writers, lambda n: rng.beta(2.0, 2.0, n))

    truth = GroundTruth()
    for ids, comm, sk in ((d_ids, d_comm, d_skill), (c_ids, c_comm, c_skill),
                          (a_ids, a_comm, a_skill), (w_ids, w_comm, w_skill)):
        for pid, cm, s in zip(ids, comm, sk):
            truth.skill[pid] = float(s)
            truth.community[pid] = int(cm)
    for pid, cm in zip(g_ids, g_comm):
        truth.community[pid] = int(cm)

    # each actor signs with one agent, popular agencies attract more clients
    agents = _Pool(g_ids, g_comm, cfg.popularity_exponent)
    actor_agent = {}
    if len(agents):
        for i, pid in enumerate(a_ids):
            (j,) = agents.draw(rng, community=a_comm[i], affinity=cfg.agent_affinity)
            actor_agent[pid] = g_ids[j]

    directors = _Pool(d_ids, d_comm, cfg.popularity_exponent)
    castings = _Pool(c_ids, c_comm, cfg.popularity_exponent)
    actors = _Pool(a_ids, a_comm, cfg.popularity_exponent)
    writers = _Pool(w_ids, w_comm, cfg.popularity_exponent)

    weights = np.array([cfg.w_director, cfg.w_casting, cfg.w_actor, cfg.w_writer])
    wsum = weights.sum()
    y0, y1 = cfg.year_range
    years = np.sort(rng.integers(y0, y1 + 1, size=cfg.n_titles))
    t_fmt = _id_format("t", cfg.n_titles)
    lo, hi = cfg.actors_per_title
    genre_p = np.array(GENRE_WEIGHTS, float) / sum(GENRE_WEIGHTS)
    lang_p = np.array(LANGUAGE_WEIGHTS, float) / sum(LANGUAGE_WEIGHTS)
    age_p = np.array(AGE_WEIGHTS, float) / sum(AGE_WEIGHTS)

    title_comm = rng.permutation(np.arange(cfg.n_titles) % n_comm)

    titles, credits = [], []
    for t in range(cfg.n_titles):
        tid = t_fmt(t)
        comm = int(title_comm[t])
        (di,) = directors.draw(rng, community=comm, affinity=1.0)
        (ci,) = castings.draw(rng, community=comm, affinity=cfg.casting_affinity)
        k = min(int(rng.integers(lo, hi + 1)), len(actors))
        ais = actors.draw(rng, k=k, community=comm, affinity=cfg.actor_affinity)
        wi = writers.draw(rng)[0] if len(writers) else None

        parts = np.array([
            d_skill[di],
            c_skill[ci],
            float(np.mean(a_skill[ais])),
            w_skill[wi] if wi is not None else 0.0,
        ])
        role_w = weights.copy()
        if wi is None:
            role_w[3] = 0.0
        score = float(role_w @ parts / role_w.sum()) if role_w.sum() > 0 else 0.0
        latent = cfg.rating_offset + cfg.rating_scale * score
        if cfg.noise_sigma > 0:
            latent += rng.normal(0.0, cfg.noise_sigma)
        tenths = int(math.floor(min(max(latent, 0.0), 10.0) * 10 + 0.5))

        series = rng.random() < cfg.series_share
        n_genres = int(rng.integers(1, 4))
        genres = tuple(GENRES[i] for i in rng.choice(len(GENRES), n_genres, replace=False, p=genre_p))
        lang = LANGUAGES[int(rng.choice(len(LANGUAGES), p=lang_p))]
        runtime = (rng.normal(45, 10) if series else rng.normal(105, 18))
        runtime = int(np.clip(round(runtime), 20 if series else 60, 90 if series else 220))
        fame = float(actors.credits[ais].sum())
        votes = int(rng.lognormal(7.0 + 0.5 * math.log1p(fame), 1.0))
        rt = None
        if rng.random() < 0.75:
            rt = round(float(np.clip(tenths + rng.normal(0, 8), 0, 100)), 1)
        budget = round(float(rng.lognormal(16.5, 1.0)), 2) if rng.random() < 0.15 else None
        income = round(float(rng.lognormal(17.0, 1.5)), 2) if rng.random() < 0.12 else None
        age = AGE_RATINGS[int(rng.choice(len(AGE_RATINGS), p=age_p))] if rng.random() < 0.8 else None

        titles.append(TitleRecord(
            title_id=tid, name=f"Title {t + 1}", year=int(years[t]),
            production_type="series" if series else "movie", genres=genres,
            language=lang, country=COUNTRY_OF[lang], runtime_min=runtime,
            rating_tenths=tenths, imdb_votes=votes, rt_user_rating=rt,
            budget=budget, income=income, age_rating=age,
        ))
        credits.append(CreditRecord(tid, d_ids[di], DIRECTOR, 1))
        credits.append(CreditRecord(tid, c_ids[ci], CASTING, 1))
        if wi is not None:
            credits.append(CreditRecord(tid, w_ids[wi], WRITER, 1))
        for order, ai in enumerate(ais, start=1):
            credits.append(CreditRecord(tid, a_ids[ai], ACTOR, order))
        truth.trace.append(TitleTrace(
            title_id=tid, community=comm, director=d_ids[di], casting=c_ids[ci],
            writer=w_ids[wi] if wi is not None else None,
            actors=tuple(a_ids[i] for i in ais), score=score, latent_rating=latent,
        ))

    people = []
    for pid in d_ids:
        people.append(PersonRecord(pid, f"Director {pid[1:]}", frozenset({DIRECTOR})))
    for pid in c_ids:
        people.append(PersonRecord(pid, f"Casting {pid[1:]}", frozenset({CASTING})))
    for pid in a_ids:
        people.append(PersonRecord(pid, f"Actor {pid[1:]}", frozenset({ACTOR}), actor_agent.get(pid)))
    for pid in w_ids:
        people.append(PersonRecord(pid, f"Writer {pid[1:]}", frozenset({WRITER})))
    for pid in g_ids:
        people.append(PersonRecord(pid, f"Agent {pid[1:]}", frozenset({AGENT})))
    return Catalog(titles=titles, people=people, credits=credits), truth


@dataclass
class SignalReport:
    n_titles: int
    corr: dict              # role -> corr(mean role skill, latent rating)
    corr_published: dict    # role -> corr(mean role skill, catalog rating)

    def director_beats_actor(self) -> bool:
        return self.corr["director"] > self.corr["actor"]


def _pearson(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if len(x) < 2 or x.std() == 0 or y.std() == 0:
        return 0.0
    return float(np.corrcoef(x, y)[0, 1])


def planted_signal_check(catalog: Catalog, truth: GroundTruth) -> SignalReport:
    """Correlate each role's mean crew skill with title ratings.

    The latent (pre-rounding) rating from the generation trace is the primary
    target; correlations against the published one-decimal rating are also
    reported.
    """
    by_title = {tr.title_id: tr for tr in truth.trace}
    role_skill = {r: [] for r in ("director", "casting", "actor", "writer")}
    latent, published = [], []
    for t in catalog.titles:
        tr = by_title.get(t.title_id)
        if tr is None:
            continue
        role_skill["director"].append(truth.skill[tr.director])
        role_skill["casting"].append(truth.skill[tr.casting] if tr.casting else 0.0)
        role_skill["actor"].append(float(np.mean([truth.skill[a] for a in tr.actors])))
        role_skill["writer"].append(truth.skill[tr.writer] if tr.writer else 0.0)
        latent.append(tr.latent_rating)
        published.append(t.imdb_rating)
    return SignalReport(
        n_titles=len(latent),
        corr={r: _pearson(v, latent) for r, v in role_skill.items()},
        corr_published={r: _pearson(v, published) for r, v in role_skill.items()},
    )


def write_groundtruth(truth: GroundTruth, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("person_id,skill\n")
        for pid in sorted(truth.skill):
            fh.write(f"{pid},{truth.skill[pid]!r}\n")
