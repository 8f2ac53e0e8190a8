import pytest

from factuality.core import Dataset, FormatError, Polarity
from factuality.harmonize import read_conllu, resolve_event_span
from factuality.harmonize.spans import SpanResolutionError

from conftest import make_record


@pytest.fixture(scope="module")
def parses(data_dir=None):
    from pathlib import Path

    path = Path(__file__).parent / "data" / "parses_sample.conllu"
    return {p.sent_id: p for p in read_conllu(path)}


class TestConlluReader:
    def test_reads_all_sentences(self, parses):
        assert set(parses) == {
            "root-branch",
            "modal-branch",
            "negation-branch",
            "adverb-branch",
            "have-to-branch",
        }
        root = parses["root-branch"]
        assert len(root) == 7
        went = root.tokens[3]
        assert (went.form, went.lemma, went.deprel, went.head) == ("went", "go", "ccomp", 1)

    def test_subtree(self, parses):
        root = parses["root-branch"]
        assert root.subtree(3) == [2, 3, 4, 5]  # "it went to Lockheed"
        assert root.subtree(1) == list(range(7))

    def test_multiword_ranges_skipped(self, tmp_path):
        path = tmp_path / "p.conllu"
        path.write_text(
            "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
            "1\tdo\tdo\tAUX\tVBP\t_\t2\taux\t_\t_\n"
            "2\tgo\tgo\tVERB\tVB\t_\t0\troot\t_\t_\n\n"
        )
        (parse,) = read_conllu(path)
        assert [t.form for t in parse.tokens] == ["do", "go"]

    def test_out_of_sequence_id_rejected(self, tmp_path):
        path = tmp_path / "p.conllu"
        path.write_text("2\tfoo\tfoo\tX\tX\t_\t0\troot\t_\t_\n")
        with pytest.raises(FormatError, match="sequence"):
            read_conllu(path)

    def test_head_out_of_range_rejected(self, tmp_path):
        path = tmp_path / "p.conllu"
        path.write_text("1\tfoo\tfoo\tX\tX\t_\t5\tdep\t_\t_\n")
        with pytest.raises(FormatError, match="head"):
            read_conllu(path)


def cb_item(sentence, verb, id="cb:test:0"):
    tokens = tuple(sentence.split())
    return make_record(
        id=id,
        dataset=Dataset.CB,
        sentence=sentence,
        tokens=tokens,
        event_span=(0, len(tokens)),
        verb=verb,
        frame="V_that_S",
        polarity=Polarity.POSITIVE,
        gold=1.0,
    )


class TestResolveEventSpan:
    def test_plain_complement_narrows_to_root(self, parses):
        item = cb_item("I think it went to Lockheed .", "think")
        resolved, decision = resolve_event_span(item, parses["root-branch"])
        assert resolved.event_tokens == ("went",)
        assert decision.branch == "root"
        assert decision.trigger is None
        assert decision.clause_span == (2, 6)

    def test_modal_keeps_whole_clause(self, parses):
        item = cb_item("B said that anything should be done .", "say")
        resolved, decision = resolve_event_span(item, parses["modal-branch"])
        assert resolved.event_tokens == ("anything", "should", "be", "done")
        assert decision.branch == "modal"
        assert decision.trigger == "should"

    def test_negation_keeps_whole_clause(self, parses):
        item = cb_item("He said it was not there .", "say")
        resolved, decision = resolve_event_span(item, parses["negation-branch"])
        assert resolved.event_tokens == ("it", "was", "not", "there")
        assert decision.branch == "negation"
        assert decision.trigger == "not"

    def test_adverb_keeps_whole_clause(self, parses):
        item = cb_item("She hoped they quickly left .", "hope")
        resolved, decision = resolve_event_span(item, parses["adverb-branch"])
        assert resolved.event_tokens == ("they", "quickly", "left")
        assert decision.branch == "adverb"
        assert decision.trigger == "quickly"

    def test_have_to_bigram_is_modal(self, parses):
        item = cb_item("He said they have to leave .", "say")
        resolved, decision = resolve_event_span(item, parses["have-to-branch"])
        assert decision.branch == "modal"
        assert decision.trigger == "have to"
        assert resolved.event_tokens == ("they", "have", "to", "leave")

    def test_token_mismatch_rejected(self, parses):
        item = cb_item("Too short .", "think")
        with pytest.raises(SpanResolutionError, match="tokens"):
            resolve_event_span(item, parses["root-branch"])

    def test_missing_complement_rejected(self, parses):
        item = cb_item("I think it went to Lockheed .", "know")
        with pytest.raises(SpanResolutionError, match="complement"):
            resolve_event_span(item, parses["root-branch"])

    def test_decision_serializes(self, parses):
        item = cb_item("I think it went to Lockheed .", "think")
        _, decision = resolve_event_span(item, parses["root-branch"])
        data = decision.to_dict()
        assert data["branch"] == "root"
        assert data["item_id"] == "cb:test:0"
