"""Catalog data model: titles, people, credits and agent links.

Ratings are kept as integer tenths so that bucket boundaries compare exactly.
Optional fields are ``None`` in memory and empty cells on disk.
"""

from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Optional

ACTOR = "actor"
DIRECTOR = "director"
CASTING = "casting_director"
WRITER = "writer"
AGENT = "talent_agent"

PERSON_ROLES = frozenset({ACTOR, DIRECTOR, CASTING, WRITER, AGENT})
CREDIT_ROLES = frozenset({ACTOR, DIRECTOR, CASTING, WRITER})
PRODUCTION_TYPES = frozenset({"movie", "series"})

TITLE_FIELDS = (
    "title_id", "name", "year", "production_type", "genres", "language",
    "country", "runtime_min", "imdb_rating", "imdb_votes", "rt_user_rating",
    "budget", "income", "age_rating",
)
PEOPLE_FIELDS = ("person_id", "name", "roles", "agent_id")
CREDIT_FIELDS = ("title_id", "person_id", "role", "billing_order")


class CatalogError(ValueError):
    """Base class for catalog validation failures."""


class SchemaError(CatalogError):
    """A CSV file or row does not match the expected layout."""


class RangeError(CatalogError):
    """A field value lies outside its permitted range."""


class IntegrityError(CatalogError):
    """Cross-record invariant violated (dangling id, duplicate, role mismatch)."""

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = tuple(offending)


def tenths_to_str(tenths: int) -> str:
    return f"{tenths // 10}.{tenths % 10}"


def parse_tenths(text: str) -> int:
    """Parse a one-decimal rating such as ``"6.5"`` or ``"7"`` into tenths."""
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise SchemaError(f"not a decimal rating: {text!r}") from None
    if not value.is_finite():
        raise SchemaError(f"not a decimal rating: {text!r}")
    scaled = value * 10
    if scaled != scaled.to_integral_value():
        raise SchemaError(f"rating has more than one decimal place: {text!r}")
    return int(scaled)


@dataclass(frozen=True)
class PersonRecord:
    person_id: str
    name: str
    roles: frozenset
    agent_id: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "roles", frozenset(self.roles))
        if not self.person_id:
            raise SchemaError("empty person_id")
        if not self.roles:
            raise RangeError(f"person {self.person_id} has no roles")
        unknown = self.roles - PERSON_ROLES
        if unknown:
            raise RangeError(f"person {self.person_id} has unknown roles {sorted(unknown)}")
        if self.agent_id is not None and AGENT in self.roles:
            raise IntegrityError(
                f"talent agent {self.person_id} cannot have an agent", [self.person_id]
            )
        if self.agent_id == self.person_id:
            raise IntegrityError(f"person {self.person_id} is their own agent", [self.person_id])


@dataclass(frozen=True)
class TitleRecord:
    title_id: str
    name: str
    year: int
    production_type: str
    genres: tuple
    language: str
    country: str
    runtime_min: int
    rating_tenths: int
    imdb_votes: int
    rt_user_rating: Optional[float] = None
    budget: Optional[float] = None
    income: Optional[float] = None
    age_rating: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "genres", tuple(sorted(set(self.genres))))
        tid = self.title_id
        if not tid:
            raise SchemaError("empty title_id")
        if not 0 <= self.rating_tenths <= 100:
            raise RangeError(
                f"title {tid}: imdb_rating {self.rating_tenths / 10} outside [0, 10]"
            )
        if not 1870 <= self.year <= 2100:
            raise RangeError(f"title {tid}: year {self.year} outside [1870, 2100]")
        if self.runtime_min <= 0:
            raise RangeError(f"title {tid}: runtime_min must be positive")
        if self.imdb_votes < 0:
            raise RangeError(f"title {tid}: imdb_votes must be non-negative")
        if self.production_type not in PRODUCTION_TYPES:
            raise RangeError(f"title {tid}: unknown production_type {self.production_type!r}")
        if self.rt_user_rating is not None and not 0 <= self.rt_user_rating <= 100:
            raise RangeError(f"title {tid}: rt_user_rating {self.rt_user_rating} outside [0, 100]")
        for name in ("budget", "income"):
            v = getattr(self, name)
            if v is not None and (v < 0 or not math.isfinite(v)):
                raise RangeError(f"title {tid}: {name} must be a non-negative amount")

    @property
    def imdb_rating(self) -> float:
        return self.rating_tenths / 10


@dataclass(frozen=True)
class CreditRecord:
    title_id: str
    person_id: str
    role: str
    billing_order: int = 1

    def __post_init__(self):
        if self.role not in CREDIT_ROLES:
            raise RangeError(f"credit ({self.title_id}, {self.person_id}): unknown role {self.role!r}")
        if self.billing_order < 1:
            raise RangeError(
                f"credit ({self.title_id}, {self.person_id}): billing_order must be >= 1"
            )


@dataclass(frozen=True, eq=False)
class Catalog:
    """Immutable, validated collection of titles, people and credits.

    Records are stored sorted by key, so two catalogs built from the same rows
    in any order compare equal.
    """

    titles: tuple = ()
    people: tuple = ()
    credits: tuple = ()
    _title_index: dict = field(default=None, init=False, repr=False)
    _person_index: dict = field(default=None, init=False, repr=False)

    def __post_init__(self):
        titles = tuple(sorted(self.titles, key=lambda t: t.title_id))
        people = tuple(sorted(self.people, key=lambda p: p.person_id))
        credits = tuple(sorted(self.credits, key=lambda c: (c.title_id, c.role, c.billing_order, c.person_id)))
        object.__setattr__(self, "titles", titles)
        object.__setattr__(self, "people", people)
        object.__setattr__(self, "credits", credits)

        dup_t = [k for k, n in Counter(t.title_id for t in titles).items() if n > 1]
        if dup_t:
            raise IntegrityError(f"duplicate title_id(s): {', '.join(dup_t)}", dup_t)
        dup_p = [k for k, n in Counter(p.person_id for p in people).items() if n > 1]
        if dup_p:
            raise IntegrityError(f"duplicate person_id(s): {', '.join(dup_p)}", dup_p)
        tindex = {t.title_id: t for t in titles}
        pindex = {p.person_id: p for p in people}

        bad_agents = sorted(
            p.agent_id for p in people
            if p.agent_id is not None
            and (p.agent_id not in pindex or AGENT not in pindex[p.agent_id].roles)
        )
        if bad_agents:
            raise IntegrityError(
                f"agent_id(s) not resolving to a talent agent: {', '.join(bad_agents)}", bad_agents
            )

        seen = set()
        for c in credits:
            key = (c.title_id, c.person_id, c.role)
            if key in seen:
                raise IntegrityError(f"duplicate credit {key}", [c.title_id, c.person_id])
            seen.add(key)
            missing = [x for x, idx in ((c.title_id, tindex), (c.person_id, pindex)) if x not in idx]
            if missing:
                raise IntegrityError(
                    f"credit references unknown id(s): {', '.join(missing)}", missing
                )
            if c.role not in pindex[c.person_id].roles:
                raise IntegrityError(
                    f"credit role {c.role} not declared for person {c.person_id}", [c.person_id]
                )
        object.__setattr__(self, "_title_index", tindex)
        object.__setattr__(self, "_person_index", pindex)

    def __eq__(self, other):
        if not isinstance(other, Catalog):
            return NotImplemented
        return (self.titles, self.people, self.credits) == (other.titles, other.people, other.credits)

    def __hash__(self):
        return hash((self.titles, self.people, self.credits))

    def counts(self):
        return len(self.titles), len(self.people), len(self.credits)

    def title(self, title_id) -> TitleRecord:
        return self._title_index[title_id]

    def person(self, person_id) -> PersonRecord:
        return self._person_index[person_id]

    def has_person(self, person_id) -> bool:
        return person_id in self._person_index

    def credits_by_title(self):
        out = defaultdict(list)
        for c in self.credits:
            out[c.title_id].append(c)
        return out

    def credits_by_person(self):
        out = defaultdict(list)
        for c in self.credits:
            out[c.person_id].append(c)
        return out


# --- CSV ingestion -------------------------------------------------------------

def _opt_float(cell):
    cell = cell.strip()
    return float(cell) if cell else None


def _opt_str(cell):
    cell = cell.strip()
    return cell or None


def _split_list(cell):
    return [x.strip() for x in cell.split("|") if x.strip()]


def _title_from_row(row):
    return TitleRecord(
        title_id=row["title_id"].strip(),
        name=row["name"],
        year=int(row["year"]),
        production_type=row["production_type"].strip(),
        genres=tuple(_split_list(row["genres"])),
        language=row["language"].strip(),
        country=row["country"].strip(),
        runtime_min=int(row["runtime_min"]),
        rating_tenths=parse_tenths(row["imdb_rating"]),
        imdb_votes=int(row["imdb_votes"]),
        rt_user_rating=_opt_float(row["rt_user_rating"]),
        budget=_opt_float(row["budget"]),
        income=_opt_float(row["income"]),
        age_rating=_opt_str(row["age_rating"]),
    )


def _person_from_row(row):
    return PersonRecord(
        person_id=row["person_id"].strip(),
        name=row["name"],
        roles=frozenset(_split_list(row["roles"])),
        agent_id=_opt_str(row["agent_id"]),
    )


def _credit_from_row(row):
    return CreditRecord(
        title_id=row["title_id"].strip(),
        person_id=row["person_id"].strip(),
        role=row["role"].strip(),
        billing_order=int(row["billing_order"]),
    )


def _read_rows(path, fields, build):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != fields:
            raise SchemaError(f"{path.name} line 1: expected header {','.join(fields)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(fields):
                raise SchemaError(
                    f"{path.name} line {line}: expected {len(fields)} fields, got {len(row)}"
                )
            try:
                records.append(build(dict(zip(fields, row))))
            except CatalogError as exc:
                raise type(exc)(f"{path.name} line {line}: {exc}") from None
            except ValueError as exc:
                raise SchemaError(f"{path.name} line {line}: {exc}") from None
    return records


def load_catalog(titles_path, people_path, credits_path) -> Catalog:
    """Load and validate a catalog from its three CSV files.

    Raises FileNotFoundError for a missing file, SchemaError for a malformed
    row (message carries the line number), RangeError for out-of-range values
    and IntegrityError for dangling or duplicate identifiers.
    """
    titles = _read_rows(titles_path, TITLE_FIELDS, _title_from_row)
    people = _read_rows(people_path, PEOPLE_FIELDS, _person_from_row)
    credits = _read_rows(credits_path, CREDIT_FIELDS, _credit_from_row)
    return Catalog(titles=titles, people=people, credits=credits)


def load_catalog_dir(directory) -> Catalog:
    d = Path(directory)
    return load_catalog(d / "titles.csv", d / "people.csv", d / "credits.csv")


def _fmt_opt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(catalog: Catalog, directory) -> None:
    """Write titles.csv, people.csv and credits.csv into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "titles.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TITLE_FIELDS)
        for t in catalog.titles:
            w.writerow([
                t.title_id, t.name, t.year, t.production_type, "|".join(t.genres),
                t.language, t.country, t.runtime_min, tenths_to_str(t.rating_tenths),
                t.imdb_votes, _fmt_opt(t.rt_user_rating), _fmt_opt(t.budget),
                _fmt_opt(t.income), _fmt_opt(t.age_rating),
            ])
    with open(d / "people.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PEOPLE_FIELDS)
        for p in catalog.people:
            w.writerow([p.person_id, p.name, "|".join(sorted(p.roles)), _fmt_opt(p.agent_id)])
    with open(d / "credits.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CREDIT_FIELDS)
        for c in catalog.credits:
            w.writerow([c.title_id, c.person_id, c.role, c.billing_order])


# --- summary statistics --------------------------------------------------------

@dataclass
class StatsReport:
    n_titles: int
    mean_rating: float
    histogram: list            # counts for bins [k, k+1), k = 0..9; 10.0 lands in bin 9
    genre_means: dict          # genre -> (n, mean rating)
    language_means: dict       # language -> (n, mean rating)
    missing: dict              # field -> count of empty cells

    def rows(self) -> Iterable[tuple]:
        """Flatten into (section, key, count, value) rows for CSV output."""
        yield ("global", "mean_rating", self.n_titles, round(self.mean_rating, 6))
        for k, n in enumerate(self.histogram):
            yield ("histogram", f"{k}-{k + 1}", n, "")
        for g, (n, m) in sorted(self.genre_means.items()):
            yield ("genre", g, n, round(m, 6))
        for g, (n, m) in sorted(self.language_means.items()):
            yield ("language", g, n, round(m, 6))
        for f, n in sorted(self.missing.items()):
            yield ("missing", f, n, "")


def rating_bin(tenths: int) -> int:
    return min(tenths // 10, 9)


def summary_stats(catalog: Catalog) -> StatsReport:
    if not catalog.titles:
        raise CatalogError("summary_stats needs at least one title")
    hist = [0] * 10
    by_genre = defaultdict(list)
    by_lang = defaultdict(list)
    missing = {"budget": 0, "income": 0, "rt_user_rating": 0}
    for t in catalog.titles:
        hist[rating_bin(t.rating_tenths)] += 1
        for g in t.genres:
            by_genre[g].append(t.rating_tenths)
        by_lang[t.language].append(t.rating_tenths)
        for f in missing:
            if getattr(t, f) is None:
                missing[f] += 1
    total = sum(t.rating_tenths for t in catalog.titles)

    def means(groups):
        return {k: (len(v), sum(v) / len(v) / 10) for k, v in groups.items()}

    return StatsReport(
        n_titles=len(catalog.titles),
        mean_rating=total / len(catalog.titles) / 10,
        histogram=hist,
        genre_means=means(by_genre),
        language_means=means(by_lang),
        missing=missing,
    )
