import json
import os
import pathlib
import subprocess

import pytest

FIXTURES = pathlib.Path(os.environ.get("RACK_FIXTURES_DIR", pathlib.Path(__file__).parents[1] / "fixtures"))
CLI = os.environ.get("RACK_CLI")

core = pytest.importorskip("rack._core")
import rack  # noqa: E402


def run_cli(*args):
    env = {k: v for k, v in os.environ.items() if k != "RACK_CODE_TOKEN"}
    return subprocess.run([CLI, *args], capture_output=True, text=True, env=env)


@pytest.fixture(scope="module")
def index():
    return rack.Index.from_dump(str(FIXTURES / "mini_posts.xml"))


def test_index_from_dump(index):
    assert len(index) == 158
    assert index.lookup("hash") == {"File": 1, "MessageDigest": 3, "String": 2}
    jsonl = rack.Index.from_dump(str(FIXTURES / "mini_posts.jsonl"), format="jsonl")
    assert jsonl == index


def test_round_trip(index, tmp_path):
    assert rack.Index.from_bytes(index.to_bytes()) == index
    path = tmp_path / "mini.idx"
    index.save(str(path))
    back = rack.Index.load(str(path))
    assert back == index
    assert back.source_digest == index.source_digest


def test_corrupt_bytes_raise_with_code(index):
    data = bytearray(index.to_bytes())
    data[40] ^= 1
    with pytest.raises(rack.RackError) as err:
        rack.Index.from_bytes(bytes(data))
    assert err.value.code == "INDEX_CHECKSUM"


def test_suggest(index):
    out = rack.suggest(index, "parsing html in java")
    assert out["keywords"] == ["pars", "html"]
    top = out["candidates"][0]
    assert top["api"] == "Document"
    assert top["relevance"] == 1.0
    rels = [c["precise"]["relevance"] for c in out["candidates"]]
    assert rels == sorted(rels, reverse=True)
    with pytest.raises(rack.RackError) as err:
        rack.suggest(index, "the of in")
    assert err.value.code == "EMPTY_QUERY"


def test_methods_match_inventory():
    inventory = json.loads((FIXTURES / "inventory.json").read_text())
    for rel, expected in inventory.items():
        methods, partial = rack.extract_methods((FIXTURES / "corpus" / rel).read_text())
        assert not partial
        assert [[m["name"], m["start_line"], m["end_line"]] for m in methods] == expected


def test_local_search():
    corpus = rack.LocalCorpus(FIXTURES / "corpus")
    assert corpus.file_count == 12
    out = corpus.search("md5 hash of string", ["MessageDigest"], k=1)
    assert len(out["results"]) == 1
    best = out["results"][0]
    assert (best["path"], best["method"], best["start_line"]) == ("crypto/Md5Util.java", "md5Hash", 12)


def test_comment_query():
    src = (FIXTURES / "comments" / "HtmlTask.java").read_text()
    assert rack.extract_comment_query(src, 11) == "Parse the HTML page and extract all links"
    with pytest.raises(rack.RackError) as err:
        rack.extract_comment_query(src, 3)
    assert err.value.code == "NO_WORKING_CONTEXT"


def test_stemmer_against_nltk():
    porter = pytest.importorskip("nltk.stem.porter")
    ref = porter.PorterStemmer(mode=porter.PorterStemmer.ORIGINAL_ALGORITHM)
    words = set()
    for path in (FIXTURES / "corpus").rglob("*.java"):
        for w in rack.split_words(path.read_text()):
            if w.isalpha():
                words.add(w.lower())
    words |= {"generalizations", "oscillators", "hopefully", "relational", "sensibiliti", "agreed", "s", "is"}
    assert len(words) > 150
    assert [w for w in sorted(words) if rack.porter_stem(w) != ref.stem(w)] == []


@pytest.mark.skipif(not CLI, reason="RACK_CLI not set")
def test_cli_json_matches_module(index, tmp_path):
    idx = tmp_path / "cli.idx"
    r = run_cli("ingest", "--posts", str(FIXTURES / "mini_posts.xml"), "--out", str(idx))
    assert r.returncode == 0, r.stderr
    assert "pairs 20" in r.stdout
    assert rack.Index.load(str(idx)) == index
    r = run_cli("suggest", "md5 hash of string", "--index", str(idx), "--json")
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout) == rack.suggest(index, "md5 hash of string")


@pytest.mark.skipif(not CLI, reason="RACK_CLI not set")
def test_cli_exit_codes(tmp_path):
    idx = tmp_path / "cli.idx"
    assert run_cli("ingest", "--posts", str(FIXTURES / "mini_posts.xml"), "--out", str(idx)).returncode == 0
    assert run_cli("suggest", "the of in", "--index", str(idx)).returncode == 2
    assert run_cli("suggest", "html", "--index", str(tmp_path / "missing.idx")).returncode == 2
    bad = tmp_path / "bad.idx"
    bad.write_bytes(idx.read_bytes().replace(b"\tDocument\t", b"\tDocumenT\t", 1))
    r = run_cli("suggest", "html", "--index", str(bad))
    assert r.returncode == 3
    assert "INDEX_CHECKSUM" in r.stderr
    r = run_cli("search", "parse html", "--index", str(idx), "--remote")
    assert r.returncode == 3
    assert "AUTH" in r.stderr
