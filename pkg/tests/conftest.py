from pathlib import Path

import pytest

from factuality.core import Dataset, Environment, EventRecord, Polarity, Split

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


def make_record(
    id="rp:test:0",
    dataset=Dataset.RP,
    sentence="The man managed to stay on his horse .",
    gold=3.0,
    annotations=(),
    verb="manage",
    frame="V_to_VP_ev",
    polarity=Polarity.POSITIVE,
    environment=None,
    split=Split.UNASSIGNED,
    genre=None,
    tokens=None,
    event_span=None,
) -> EventRecord:
    toks = tuple(tokens) if tokens is not None else tuple(sentence.split())
    return EventRecord(
        id=id,
        dataset=dataset,
        split=split,
        sentence=sentence,
        tokens=toks,
        event_span=tuple(event_span) if event_span is not None else (0, len(toks)),
        gold=gold,
        annotations=annotations,
        verb=verb,
        frame=frame,
        polarity=polarity,
        environment=environment,
        genre=genre,
    )
