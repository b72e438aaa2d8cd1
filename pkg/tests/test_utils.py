import json

from scripts.utils import (
    HumorLMError,
    decode_text,
    dump_json,
    expand_paths,
    iter_decoded_lines,
    load_json_or_default,
    strip_newline,
    write_json,
)


def test_decode_text_replaces_invalid_bytes():
    assert decode_text(b"caf\xc3\xa9") == "café"
    assert decode_text(b"bad\xffbyte") == "bad�byte"
    assert decode_text("вже рядок") == "вже рядок"


def test_strip_newline_keeps_other_whitespace():
    assert strip_newline("text \t\r\n") == "text \t"
    assert strip_newline("text\n") == "text"
    assert strip_newline("text") == "text"


def test_iter_decoded_lines_numbers_from_one():
    lines = list(iter_decoded_lines([b"one\n", "two\r\n", b"\xff\n"]))
    assert lines == [(1, "one"), (2, "two"), (3, "�")]


def test_expand_paths_sorts_directory_entries(tmp_path):
    folder = tmp_path / "gold"
    folder.mkdir()
    (folder / "b.tsv").write_text("")
    (folder / "a.tsv").write_text("")
    (folder / "notes.txt").write_text("")
    (folder / "nested").mkdir()
    single = tmp_path / "single.txt"
    single.write_text("")

    assert expand_paths([folder], suffix=".tsv") == [folder / "a.tsv", folder / "b.tsv"]
    assert expand_paths([single, folder]) == [
        single,
        folder / "a.tsv",
        folder / "b.tsv",
        folder / "notes.txt",
    ]


def test_write_json_creates_parents_and_sorts_keys(tmp_path):
    target = tmp_path / "reports" / "nested" / "report.json"
    write_json(target, {"b": 1, "a": "ї"})

    text = target.read_text(encoding="utf-8")
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert "ї" in text
    assert json.loads(text) == {"a": "ї", "b": 1}
    assert dump_json({"x": [1]}) == '{\n  "x": [\n    1\n  ]\n}'


def test_load_json_or_default(tmp_path):
    missing = tmp_path / "missing.json"
    empty = tmp_path / "empty.json"
    empty.write_text("  \n")
    filled = tmp_path / "filled.json"
    filled.write_text('{"experiments": []}')

    assert load_json_or_default(missing, {"default": True}) == {"default": True}
    assert load_json_or_default(empty, []) == []
    assert load_json_or_default(filled, {}) == {"experiments": []}


def test_error_base_is_runtime_error():
    assert issubclass(HumorLMError, RuntimeError)
