"""
Pytest configuration and fixtures for the test suite.

The seeded corpus fixture builds answer blocks whose revisions are complete
Java methods. Every revision carries its own version string literal
(``"b12_v0"``) so that each revision has at least one token no other
document shares, and every revision changes the method's structure.
"""

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

import pytest

from app.revsearch.config import SearchConfig
from app.revsearch.extractor import SourceFile, TokenKind, extract_methods, lex
from app.revsearch.revisions import SnippetRevision


STATEMENTS = (
    ("{acc} += {arr}[{idx}] * {k};",),
    ("if ({acc} > {limit}) {{", "    {acc} = {acc} - {limit};", "}}"),
    ("{acc} = Math.max({acc}, {limit} - {k});",),
    ("for (int {idx} = 0; {idx} < {arr}.length; {idx}++) {{", "    {acc} += {arr}[{idx}];", "}}"),
    ("while ({acc} > {limit} * {k}) {{", "    {acc} /= 2;", "}}"),
    ("{items}.add({acc} + {k});",),
    ("System.out.println({tag} + {acc});",),
    ("try {{", "    {acc} += Integer.parseInt({tag}.trim());",
     "}} catch (NumberFormatException e) {{", "    {acc} -= {k};", "}}"),
    ("{acc} = {acc} * {k} + {arr}.length;",),
    ("if ({items}.isEmpty()) {{", "    {items}.add({limit});", "}} else {{",
     "    {acc} += {items}.size();", "}}"),
)

NAME_POOLS = {
    "arr": ("values", "data", "nums", "samples"),
    "limit": ("limit", "bound", "cap", "ceiling"),
    "items": ("items", "bucket", "sink", "results"),
    "tag": ("tag", "label", "marker", "note"),
    "acc": ("total", "sum", "acc", "score"),
    "idx": ("i", "j", "pos", "n"),
}
VERBS = ("compute", "merge", "collect", "reduce", "score", "scan", "tally", "fold")

UNRELATED_TEMPLATE = (
    "public static long {name}(char[] {buf}, long {seed}) {{",
    "    long {h} = {seed} ^ {c1}L;",
    "    int {j} = 0;",
    "    do {{",
    "        switch ({buf}[{j}]) {{",
    "            case 'a':",
    "                {h} = {h} >>> {c2};",
    "                break;",
    "            case 'z':",
    "                {h} ^= {h} << {c3};",
    "                break;",
    "            default:",
    "                {h} += {buf}[{j}] > 'm' ? {c4} : -{c5};",
    "        }}",
    "        {j}++;",
    "    }} while ({j} < {buf}.length);",
    "    return {h} == 0 ? \"{lit}\".length() : {h};",
    "}}",
)


@dataclass
class Block:
    post_id: int
    local_id: int
    revisions: List[Tuple[str, ...]]
    names: Dict[str, str]

    def doc_id(self, position: int) -> str:
        last = len(self.revisions) - 1
        label = "original" if position == 0 else "latest" if position == last else str(position)
        return f"{self.post_id}_{self.local_id}_{label}"


@dataclass
class SeededCorpus:
    blocks: List[Block]
    verbatim: List[Tuple[Block, int]] = field(default_factory=list)
    renamed: List[Tuple[Block, int, Tuple[str, ...]]] = field(default_factory=list)
    unrelated: List[Tuple[str, ...]] = field(default_factory=list)

    def revisions(self) -> List[SnippetRevision]:
        return [
            SnippetRevision(b.post_id, b.local_id, seq, body, True)
            for b in self.blocks
            for seq, body in enumerate(b.revisions)
        ]


def render_statement(template: Tuple[str, ...], names: Dict[str, str], k: int) -> List[str]:
    return ["    " + line.format(k=k, **names) for line in template]


def block_method(block_no: int, version: int, names: Dict[str, str], statements: List[Tuple[int, int]]) -> Tuple[str, ...]:
    lines = [
        f"public int {names['method']}(int[] {names['arr']}, int {names['limit']}, "
        f"java.util.List<Integer> {names['items']}) {{",
        f"    String {names['tag']} = \"b{block_no}_v{version}\";",
        f"    int {names['acc']} = 0;",
    ]
    for template_no, k in statements:
        lines.extend(render_statement(STATEMENTS[template_no], names, k))
    lines.append(f"    return {names['acc']};")
    lines.append("}")
    return tuple(lines)


def mutate(rng: random.Random, statements: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
    """Insert, replace or remove one statement so the structure always changes."""
    result = list(statements)
    choice = rng.choice(("insert", "replace", "remove") if len(result) > 2 else ("insert", "replace"))
    position = rng.randrange(len(result))
    if choice == "insert":
        result.insert(position, (rng.randrange(len(STATEMENTS)), rng.randint(2, 9)))
    elif choice == "replace":
        current = result[position][0]
        options = [n for n in range(len(STATEMENTS)) if n != current]
        result[position] = (rng.choice(options), rng.randint(2, 9))
    else:
        del result[position]
    return result


def rename_identifiers(lines, mapping: Dict[str, str]) -> Tuple[str, ...]:
    """Rename identifier tokens only; literals and keywords are untouched."""
    text = "\n".join(lines)
    out, pos = [], 0
    for token in lex(text):
        if token.kind is TokenKind.IDENT and token.text in mapping:
            out.append(text[pos:token.start])
            out.append(mapping[token.text])
            pos = token.end
    out.append(text[pos:])
    return tuple("".join(out).split("\n"))


def unrelated_method(n: int, rng: random.Random) -> Tuple[str, ...]:
    values = dict(
        name=f"scramble{n}x", buf=f"chars{n}x", seed=f"seed{n}x", h=f"hash{n}x", j=f"cursor{n}x",
        lit=f"zz{n}q", c1=rng.randint(11, 99), c2=rng.randint(11, 31), c3=rng.randint(11, 31),
        c4=rng.randint(100, 999), c5=rng.randint(100, 999),
    )
    return tuple(line.format(**values) for line in UNRELATED_TEMPLATE)


def build_seeded_corpus(seed: int = 7, blocks: int = 50) -> SeededCorpus:
    rng = random.Random(seed)
    result = SeededCorpus(blocks=[])
    for block_no in range(blocks):
        names = {key: rng.choice(pool) for key, pool in NAME_POOLS.items()}
        names["method"] = f"{rng.choice(VERBS)}Block{block_no}"
        statements = [(rng.randrange(len(STATEMENTS)), rng.randint(2, 9)) for _ in range(rng.randint(2, 4))]
        revisions = []
        for version in range(rng.randint(2, 4)):
            if version:
                statements = mutate(rng, statements)
            revisions.append(block_method(block_no, version, names, statements))
        result.blocks.append(Block(1000 + block_no, block_no % 3, revisions, names))

    picks = rng.sample(result.blocks, 20)
    result.verbatim = [(b, rng.randrange(len(b.revisions) - 1)) for b in picks]
    picks = rng.sample(result.blocks, 20)
    for b in picks:
        position = rng.randrange(len(b.revisions) - 1)
        keys = rng.sample(["method", "arr", "limit", "items", "acc"], rng.randint(3, 5))
        mapping = {b.names[key]: f"renamed{key.capitalize()}{b.post_id}" for key in keys}
        result.renamed.append((b, position, rename_identifiers(b.revisions[position], mapping)))
    result.unrelated = [unrelated_method(n, rng) for n in range(20)]
    return result


def write_dump(path: Path, revisions, accepted: bool = True) -> Path:
    """Write revisions as a JSON Lines dump."""
    with open(path, "w", encoding="utf-8") as f:
        for rev in revisions:
            f.write(json.dumps({
                "post_id": rev.post_id,
                "local_id": rev.local_id,
                "history_seq": rev.history_seq,
                "is_accepted": rev.is_accepted if accepted else False,
                "body": "\n".join(rev.body),
            }) + "\n")
    return path


def java_class(name: str, methods) -> str:
    lines = ["package fixture;", "", "import java.util.List;", "", f"public class {name} {{"]
    for body in methods:
        lines.append("")
        lines.extend("    " + line for line in body)
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_project(root: Path, files: Dict[str, List[Tuple[str, ...]]]) -> Path:
    """Write {relative path: [method bodies]} as Java classes under root."""
    for rel, methods in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(java_class(Path(rel).stem, methods), encoding="utf-8")
    return root


def method_of(source: str):
    """The single method record of a class holding source."""
    records = extract_methods(SourceFile.from_text("p", "T.java", "class T {\n" + source + "\n}\n"))
    assert len(records) == 1, records
    return records[0]


def method_span(path: Path) -> Tuple[int, int]:
    """(start, end) lines of the single method in a Java file."""
    [record] = extract_methods(SourceFile.from_text("p", path.name, path.read_text(encoding="utf-8")))
    return record.start_line, record.end_line


TRUTH_HEADER = "query_file,project,path,start,end,pattern"


def write_truth(path: Path, rows) -> Path:
    lines = [TRUTH_HEADER] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def numbered_method(name: str, tag: str, statements: int) -> Tuple[str, ...]:
    """A method of statements + 5 lines, told apart by its name and string literal."""
    lines = [f"public int {name}(int[] values) {{", "    int total = 0;"]
    lines += [f"    total += values[{k}] * {k + 2};" for k in range(statements)]
    lines += [f"    System.out.println(\"{tag}\");", "    return total;", "}"]
    return tuple(lines)


def write_size_gate_fixture(root: Path) -> Tuple[Path, Path]:
    """Five indexed methods and verbatim queries of 7 and 12 lines.

    With min_clone_size 6 both queries rank their method first (MRR 1.0);
    with 10 the short query falls below the size gate (MRR 0.5).
    """
    corpus = root / "corpus"
    methods = {
        ("alpha", "src/Short.java"): numbered_method("shortSum", "alpha-short", 2),
        ("alpha", "src/Long.java"): numbered_method("longSum", "alpha-long", 7),
        ("beta", "src/Other.java"): numbered_method("otherSum", "beta-other", 4),
        ("beta", "src/More.java"): numbered_method("moreSum", "beta-more", 9),
        ("gamma", "Main.java"): numbered_method("mainSum", "gamma-main", 3),
    }
    for (project, rel), body in methods.items():
        write_project(corpus / project, {rel: [body]})

    queries = root / "queries"
    queries.mkdir()
    rows = []
    for name, key in (("short", ("alpha", "src/Short.java")), ("long", ("alpha", "src/Long.java"))):
        (queries / f"{name}.java").write_text("\n".join(methods[key]) + "\n", encoding="utf-8")
        start, end = method_span(corpus / key[0] / key[1])
        rows.append((f"queries/{name}.java", key[0], key[1], start, end, "QS"))
    rows.append(("queries/short.java", "beta", "src/Other.java", 7, 15, "BP"))
    return corpus, write_truth(root / "truth.csv", rows)


def write_seeded_tuning_fixture(root: Path, corpus: SeededCorpus) -> Tuple[Path, Path]:
    """Five projects holding the latest revision of 20 blocks.

    Queries are either the original revision (a Type-3 variant) or the
    latest revision with one variable renamed.
    """
    projects = root / "corpus"
    queries = root / "queries"
    queries.mkdir(parents=True)
    rows = []
    for n, block in enumerate(corpus.blocks[:20]):
        project, rel = f"project{n % 5}", f"src/Block{n}.java"
        write_project(projects / project, {rel: [block.revisions[-1]]})
        start, end = method_span(projects / project / rel)
        if n % 2:
            query = block.revisions[0]
        else:
            query = rename_identifiers(block.revisions[-1], {block.names["acc"]: "renamedAcc"})
        (queries / f"q{n}.java").write_text("\n".join(query) + "\n", encoding="utf-8")
        rows.append((f"queries/q{n}.java", project, rel, start, end, ("QS", "EX", "UD")[n % 3]))
    return projects, write_truth(root / "truth.csv", rows)


@pytest.fixture
def default_config():
    return SearchConfig()


@pytest.fixture(scope="session")
def seeded_corpus():
    return build_seeded_corpus()


@pytest.fixture
def dump_writer(tmp_path):
    def write(revisions, name="dump.jsonl"):
        return write_dump(tmp_path / name, revisions)
    return write


@pytest.fixture
def project_writer(tmp_path):
    def write(files, name="project"):
        return write_project(tmp_path / name, files)
    return write


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep host settings from leaking into runs."""
    monkeypatch.delenv("REVSEARCH_JOBS", raising=False)
    monkeypatch.delenv("REVSEARCH_LOG_LEVEL", raising=False)


SIX_LINE_METHOD = (
    "public int sumPositive(int[] values) {",
    "    int total = 0;",
    "    for (int v : values) {",
    "        if (v > 0) {",
    "            total += v;",
    "        }",
    "    }",
    "    return total;",
    "}",
)


@pytest.fixture
def six_line_method():
    return SIX_LINE_METHOD
