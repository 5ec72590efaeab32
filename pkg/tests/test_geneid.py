import json

import pytest

from gig.errors import CacheCorruptError, OnlineResolveError
from gig.geneid import (
    GeneIdMapping,
    MappingEntry,
    canonicalize,
    resolve_batch_online,
    strip_ensembl_version,
)


def test_strip_ensembl_version():
    assert strip_ensembl_version("ENSG00000141510.15") == "ENSG00000141510"
    assert strip_ensembl_version("ENSG00000141510") == "ENSG00000141510"
    assert strip_ensembl_version("TP53.1") == "TP53.1"
    assert strip_ensembl_version("ENST00000269305.4") == "ENST00000269305.4"


@pytest.fixture
def table():
    return GeneIdMapping(
        {
            "ensembl:ENSG000001": MappingEntry("GENEA", True),
            "ensembl:ENSG000002": MappingEntry("GENEB", False),
            "uniprot:P04637": MappingEntry("TP53", True),
            "entrez:7157": MappingEntry("TP53", True),
            "label:MYLABEL": MappingEntry("GENEC", True),
        }
    )


def test_canonicalize_direct_hit(table):
    assert canonicalize("ensembl:ENSG000001", table, True) == "GENEA"


def test_canonicalize_coding_filter(table):
    assert canonicalize("ensembl:ENSG000002", table, True) is None
    assert canonicalize("ensembl:ENSG000002", table, False) == "GENEB"


def test_canonicalize_unmapped(table):
    assert canonicalize("ensembl:ENSG999999", table, True) is None
    assert canonicalize("junk-without-namespace", table, True) is None


def test_canonicalize_label_case_insensitive(table):
    assert canonicalize("label:mylabel", table, True) == "GENEC"


def test_canonicalize_strips_ensembl_version(table):
    assert canonicalize("ensembl:ENSG000001.7", table, True) == "GENEA"


def test_load_tsv(tmp_path):
    p = tmp_path / "map.tsv"
    p.write_text(
        "# comment\n"
        "ensembl:ENSG000001\tGENEA\t1\n"
        "label:foo\tGENEB\t0\n"
    )
    table = GeneIdMapping.load_tsv(p)
    assert canonicalize("ensembl:ENSG000001", table, True) == "GENEA"
    assert canonicalize("label:FOO", table, False) == "GENEB"
    assert canonicalize("label:FOO", table, True) is None


def _fake_fetcher(responses):
    calls = []

    def fetch(ids):
        calls.append(list(ids))
        return {i: responses[i] for i in ids if i in responses}

    fetch.calls = calls
    return fetch


FIVE_IDS = {
    "ENSG00000141510": {"symbol": "TP53", "type_of_gene": "protein-coding"},
    "ENSG00000012048": {"symbol": "BRCA1", "type_of_gene": "protein-coding"},
    "7422": {"symbol": "VEGFA", "type_of_gene": "protein-coding"},
    "P01308": {"symbol": "INS", "type_of_gene": "protein-coding"},
    "ENSG00000283633": {"symbol": "MIR4422HG", "type_of_gene": "ncRNA"},
}


def test_resolve_batch_empty(tmp_path):
    assert len(resolve_batch_online([], tmp_path)) == 0


def test_resolve_batch_records_fixture(tmp_path):
    fetch = _fake_fetcher(FIVE_IDS)
    mapping = resolve_batch_online(sorted(FIVE_IDS), tmp_path, fetcher=fetch)
    assert len(mapping) == 5
    assert canonicalize("ensembl:ENSG00000141510", mapping, True) == "TP53"
    assert canonicalize("entrez:7422", mapping, True) == "VEGFA"
    assert canonicalize("uniprot:P01308", mapping, True) == "INS"
    # non-coding filtered when required
    assert canonicalize("ensembl:ENSG00000283633", mapping, True) is None
    assert canonicalize("ensembl:ENSG00000283633", mapping, False) == "MIR4422HG"


def test_resolve_batch_cache_round_trip(tmp_path):
    fetch = _fake_fetcher(FIVE_IDS)
    ids = sorted(FIVE_IDS)
    first = resolve_batch_online(ids, tmp_path, fetcher=fetch)
    assert len(fetch.calls) == 1
    # second call is served entirely from disk
    second = resolve_batch_online(ids, tmp_path, fetcher=fetch)
    assert len(fetch.calls) == 1
    assert dict(first.items()) == dict(second.items())


def test_resolve_batch_network_failure(tmp_path):
    def broken(ids):
        raise ConnectionError("no route to host")

    with pytest.raises(OnlineResolveError) as err:
        resolve_batch_online(["ENSG00000141510"], tmp_path, fetcher=broken)
    assert "ENSG00000141510" in str(err.value)


def test_resolve_batch_corrupt_cache(tmp_path):
    fetch = _fake_fetcher(FIVE_IDS)
    ids = sorted(FIVE_IDS)
    resolve_batch_online(ids, tmp_path, fetcher=fetch)
    cache_file = next(tmp_path.glob("batch_*.json"))
    cache_file.write_text("{not json")
    with pytest.raises(CacheCorruptError) as err:
        resolve_batch_online(ids, tmp_path, fetcher=fetch)
    assert str(cache_file) in str(err.value)


def test_unresolved_ids_cached_as_absent(tmp_path):
    fetch = _fake_fetcher({"7422": FIVE_IDS["7422"]})
    mapping = resolve_batch_online(["7422", "NOPE123"], tmp_path, fetcher=fetch)
    assert canonicalize("entrez:7422", mapping, True) == "VEGFA"
    assert canonicalize("label:NOPE123", mapping, True) is None
    raw = json.loads(next(tmp_path.glob("batch_*.json")).read_text())
    assert raw["NOPE123"] is None
