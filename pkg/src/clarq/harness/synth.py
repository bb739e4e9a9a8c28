"""Seeded synthetic datasets: movie and order tables, clustered embeddings.

Shapes mirror the production-style corpora the system targets (a wide movie
table, a joinable commerce trio, a keyword-tagged embedding corpus) at desk
scale. Everything is deterministic per seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
import numpy as np

from ..catalog import Table, table_from_columns
from ..vector.corpus import EmbeddingCorpus

SCALES = {
    "small": {"movies": 10_000, "orders": 10_000, "products": 2_000,
              "categories": 20, "vectors": 5_000},
    "medium": {"movies": 100_000, "orders": 100_000, "products": 20_000,
               "categories": 20, "vectors": 20_000},
}

DEFAULT_CLUSTERS = 50
DEFAULT_DIM = 32
CLUSTER_SIGMA = 0.05

_TITLE_HEADS = (
    "Iron", "Silent", "Crimson", "Golden", "Broken", "Hidden", "Midnight",
    "Savage", "Frozen", "Burning", "Lost", "Final", "Electric", "Paper",
    "Hollow", "Wicked", "Gentle", "Rapid", "Solar", "Lunar",
)
_TITLE_TAILS = (
    "Empire", "River", "Protocol", "Garden", "Horizon", "Signal", "Harvest",
    "Circuit", "Kingdom", "Passage", "Window", "Engine", "Voyage", "Echo",
    "Tempest", "Outpost", "Covenant", "Mirage", "Lantern", "Orchard",
)
_CATEGORY_NAMES = (
    "dairy", "produce", "bakery", "seafood", "snacks", "beverages", "frozen",
    "pantry", "deli", "household", "personal care", "pets", "babies",
    "alcohol", "international", "breakfast", "canned goods", "dry goods",
    "bulk", "missing",
)
_PRODUCT_WORDS = (
    "organic", "classic", "roasted", "smoked", "fresh", "whole", "sliced",
    "sparkling", "creamy", "crunchy", "spiced", "sweet", "salted", "wild",
    "golden", "dark", "light", "double", "zero", "original",
)
_PRODUCT_NOUNS = (
    "milk", "bread", "salmon", "chips", "soda", "yogurt", "granola", "pasta",
    "sauce", "cheese", "coffee", "tea", "butter", "rice", "beans", "cereal",
    "juice", "cookies", "soup", "olives",
)
_TAG_WORDS = (
    "genomics", "plasma", "wavelets", "optics", "robotics", "enzymes",
    "glaciers", "neurons", "polymers", "quasars", "magnets", "proteins",
    "turbines", "antennas", "catalysts", "membranes", "sensors", "alloys",
    "lasers", "reactors", "crystals", "circuits", "vaccines", "satellites",
    "volcanoes", "corals", "aquifers", "isotopes", "pigments", "tendons",
    "fungi", "lichens", "meteors", "nebulae", "pulsars", "dunes", "fjords",
    "geysers", "tundras", "mangroves", "plankton", "spores", "synapses",
    "ribosomes", "mitochondria", "dendrites", "axons", "peptides", "lipids",
    "sugars", "resins", "ceramics", "foams", "gels", "emulsions",
)
# Boilerplate tags on every doc; IDF zeroes them out of facet candidates.
_GENERIC_TAGS = ("paper", "study")


@dataclass
class SyntheticData:
    tables: dict
    corpus: EmbeddingCorpus
    corpus_name: str = "papers"


def generate_movies(seed: int, rows: int) -> Table:
    """Five columns: title, year, rating (skewed), runtime, gross."""
    rng = np.random.default_rng(seed)
    n_titles = max(20, rows // 8)
    heads = rng.integers(0, len(_TITLE_HEADS), n_titles)
    tails = rng.integers(0, len(_TITLE_TAILS), n_titles)
    numbers = rng.integers(1, 40, n_titles)
    pool = [
        f"{_TITLE_HEADS[h]} {_TITLE_TAILS[t]} {num}"
        for h, t, num in zip(heads, tails, numbers)
    ]
    # Zipf-ish popularity over the title pool (remakes repeat).
    weights = 1.0 / np.arange(1, n_titles + 1) ** 0.8
    weights /= weights.sum()
    titles = [pool[i] for i in rng.choice(n_titles, size=rows, p=weights)]
    years = rng.integers(1950, 2025, rows).tolist()
    ratings = np.round(rng.beta(8, 3, rows) * 10, 1).tolist()
    runtimes = np.clip(rng.normal(110, 25, rows), 45, 360).astype(int).tolist()
    gross = np.round(rng.lognormal(16, 1.5, rows), 2).tolist()
    return table_from_columns("movies", [
        ("title", "text", titles),
        ("year", "integer", years),
        ("rating", "real", ratings),
        ("runtime", "integer", runtimes),
        ("gross", "real", gross),
    ])


def generate_orders(seed: int, orders: int, products: int,
                    categories: int) -> dict:
    """Joinable commerce trio: orders -> products -> categories."""
    rng = np.random.default_rng(seed)
    cat_names = list(_CATEGORY_NAMES[:categories])
    categories_t = table_from_columns("categories", [
        ("category_id", "integer", list(range(1, categories + 1))),
        ("category_name", "text", cat_names),
    ], primary_key="category_id")

    pw = rng.integers(0, len(_PRODUCT_WORDS), products)
    pn = rng.integers(0, len(_PRODUCT_NOUNS), products)
    product_names = [
        f"{_PRODUCT_WORDS[w]} {_PRODUCT_NOUNS[n]} {i}"
        for i, (w, n) in enumerate(zip(pw, pn), 1)
    ]
    cat_weights = 1.0 / np.arange(1, categories + 1) ** 0.7
    cat_weights /= cat_weights.sum()
    product_cats = (rng.choice(categories, size=products, p=cat_weights) + 1).tolist()
    prices = np.round(rng.lognormal(1.5, 0.8, products), 2).tolist()
    products_t = table_from_columns("products", [
        ("product_id", "integer", list(range(1, products + 1))),
        ("product_name", "text", product_names),
        ("category_id", "integer", product_cats),
        ("price", "real", prices),
    ], primary_key="product_id")

    prod_weights = 1.0 / np.arange(1, products + 1) ** 0.6
    prod_weights /= prod_weights.sum()
    order_products = (rng.choice(products, size=orders, p=prod_weights) + 1).tolist()
    users = rng.integers(1, max(2, orders // 5), orders).tolist()
    quantities = rng.integers(1, 12, orders).tolist()
    base = date(2023, 1, 1)
    span = (date(2025, 6, 30) - base).days
    offsets = (span * rng.beta(2.2, 1.0, orders)).astype(int)
    order_dates = [base + timedelta(days=int(o)) for o in offsets]
    orders_t = table_from_columns("orders", [
        ("order_id", "integer", list(range(1, orders + 1))),
        ("product_id", "integer", order_products),
        ("user_id", "integer", users),
        ("quantity", "integer", quantities),
        ("order_date", "date", order_dates),
    ], primary_key="order_id")

    return {"orders": orders_t, "products": products_t,
            "categories": categories_t}


def generate_corpus(seed: int, n_vectors: int,
                    n_clusters: int = DEFAULT_CLUSTERS,
                    dim: int = DEFAULT_DIM,
                    sigma: float = CLUSTER_SIGMA) -> EmbeddingCorpus:
    """Gaussian blobs, one unique tag keyword per cluster plus generic tags."""
    if n_clusters > len(_TAG_WORDS):
        raise ValueError(f"at most {len(_TAG_WORDS)} clusters supported")
    rng = np.random.default_rng(seed)
    centroids = rng.uniform(0.0, 1.0, size=(n_clusters, dim))
    sizes = [n_vectors // n_clusters] * n_clusters
    for i in range(n_vectors - sum(sizes)):
        sizes[i] += 1
    vectors = np.empty((n_vectors, dim), dtype=np.float64)
    labels: list[int] = []
    keywords: list[frozenset] = []
    pos = 0
    for c, size in enumerate(sizes):
        vectors[pos:pos + size] = centroids[c] + rng.normal(0, sigma, (size, dim))
        tag = _TAG_WORDS[c]
        for _ in range(size):
            keywords.append(frozenset({tag, *_GENERIC_TAGS}))
            labels.append(c)
        pos += size
    return EmbeddingCorpus(dim=dim, vectors=vectors,
                           ids=list(range(n_vectors)),
                           keywords=keywords, labels=labels)


def generator_centroids(corpus: EmbeddingCorpus) -> np.ndarray:
    """Per-label mean vectors of a labeled corpus."""
    if corpus.labels is None:
        raise ValueError("corpus has no generator labels")
    labels = np.asarray(corpus.labels)
    k = labels.max() + 1
    return np.vstack([corpus.vectors[labels == c].mean(axis=0)
                      for c in range(k)])


def blob_separation(corpus: EmbeddingCorpus) -> float:
    """Mean inter-centroid distance over mean point-to-centroid distance."""
    cents = generator_centroids(corpus)
    labels = np.asarray(corpus.labels)
    k = len(cents)
    inter = [
        float(np.linalg.norm(cents[i] - cents[j]))
        for i in range(k) for j in range(i + 1, k)
    ]
    intra = []
    for c in range(k):
        member = corpus.vectors[labels == c]
        intra.extend(np.linalg.norm(member - cents[c], axis=1).tolist())
    return float(np.mean(inter) / np.mean(intra))


def generate_synthetic(seed: int, scale: str) -> SyntheticData:
    """Movie-like and orders-like tables plus a clustered corpus, per scale."""
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}; choose from {sorted(SCALES)}")
    sizes = SCALES[scale]
    tables = {"movies": generate_movies(seed, sizes["movies"])}
    tables.update(generate_orders(seed + 1, sizes["orders"],
                                  sizes["products"], sizes["categories"]))
    corpus = generate_corpus(seed + 2, sizes["vectors"])
    return SyntheticData(tables=tables, corpus=corpus)


# ---------------------------------------------------------------------------
# Workload builders
# ---------------------------------------------------------------------------


def build_relational_workload(seed: int, count: int = 36) -> list:
    """Vague relational entries built to expose clarification gains.

    Entries cycle through sort-heavy movie scans, order/product/category
    joins, and a few fully-specified cheap controls where the gate should
    stay silent.
    """
    from .workload import WorkloadEntry

    rng = np.random.default_rng(seed)
    entries = []
    rating_bands = [(7.8, 10.0), (6.5, 7.8), (0.0, 6.5)]
    year_bands = [(2010, 2024), (1990, 2009), (1950, 1989)]
    runtime_bands = [(45, 95), (95, 140), (140, 360)]
    movie_sorts = ["gross", "rating", "runtime", "year"]
    vague_movie = [
        ("show popular movies where year >= {y} order by {col} desc",
         "rating", rating_bands),
        ("show recent successful movies where rating >= 1.0 order by {col} desc",
         "year", year_bands),
        ("show some long movies where gross >= 1000.0 order by {col} desc",
         "runtime", runtime_bands),
        ("show top movies where runtime >= 60 order by {col} desc",
         "rating", rating_bands),
    ]
    vague_orders = [
        ("show large orders, products, categories where quantity >= 1 "
         "order by price desc", "category_name"),
        ("show popular orders, products, categories where quantity >= 2 "
         "order by order_date desc", "category_name"),
    ]
    cheap = [
        "count movies where year = 1999",
        "count orders where quantity = 3",
    ]

    i = 0
    while len(entries) < count:
        kind = i % 6
        eid = f"rel{len(entries):03d}"
        if kind < 3:
            tpl, target, bands = vague_movie[i % len(vague_movie)]
            col = movie_sorts[i % len(movie_sorts)]
            band = bands[int(rng.integers(0, len(bands)))]
            nl = tpl.format(col=col, y=int(rng.integers(1950, 1995)))
            lo, hi = band
            ref = (f"show movies where {target} between {lo} and {hi} "
                   f"and {_base_pred(nl)} order by {col} desc")
            entries.append(WorkloadEntry(
                id=eid, nl_query=nl, backend="relational",
                reference_query=ref,
                facet_annotations={target: [lo, hi]},
                tags={"vague_kind": "numeric", "cost_band": "high"}))
        elif kind < 5:
            tpl, target = vague_orders[i % len(vague_orders)]
            cat = _CATEGORY_NAMES[int(rng.integers(0, 8))]
            tail = tpl.split(" where ", 1)[1]
            ref = (f"show orders, products, categories where "
                   f"category_name = '{cat}' and {tail}")
            entries.append(WorkloadEntry(
                id=eid, nl_query=tpl, backend="relational",
                reference_query=ref,
                facet_annotations={target: cat},
                tags={"vague_kind": "categorical", "cost_band": "high"}))
        else:
            nl = cheap[i % len(cheap)]
            entries.append(WorkloadEntry(
                id=eid, nl_query=nl, backend="relational",
                reference_query=nl,
                facet_annotations={},
                tags={"vague_kind": "none", "cost_band": "low"}))
        i += 1
    return entries


def _base_pred(nl: str) -> str:
    return nl.split(" where ", 1)[1].split(" order by ", 1)[0]


def build_vector_workload(corpus: EmbeddingCorpus, seed: int,
                          count: int = 30, k: int = 100) -> list:
    """Midpoint queries between neighboring clusters, truth = intended side.

    Each entry's query vector sits halfway between a cluster centroid and
    its nearest neighbor centroid; ground truth is the top-k brute-force
    result restricted to the intended cluster's tag.
    """
    from ..vector.search import brute_force_search
    from .workload import WorkloadEntry

    cents = generator_centroids(corpus)
    k_clusters = len(cents)
    rng = np.random.default_rng(seed)
    labels = np.asarray(corpus.labels)

    entries = []
    for idx in range(count):
        a = int(rng.integers(0, k_clusters))
        d = np.linalg.norm(cents - cents[a], axis=1)
        d[a] = np.inf
        b = int(np.argmin(d))
        midpoint = (cents[a] + cents[b]) / 2.0
        tag = _TAG_WORDS[a]

        member_pos = np.where(labels == a)[0]
        sub = EmbeddingCorpus(
            dim=corpus.dim,
            vectors=corpus.vectors[member_pos],
            ids=[corpus.ids[p] for p in member_pos],
            keywords=[corpus.keywords[p] for p in member_pos],
        )
        truth = [h.id for h in brute_force_search(sub, midpoint, k)]

        entries.append(WorkloadEntry(
            id=f"vec{idx:03d}",
            nl_query="find some recent papers about the usual subject limit "
                     f"{k}",
            backend="vector",
            truth_ids=truth,
            facet_annotations={"topic": tag},
            tags={"vague_kind": "midpoint", "cost_band": "vector",
                  "cluster": str(a), "neighbor": str(b)},
            query_vector=[float(v) for v in midpoint],
            k=k,
        ))
    return entries
