"""Multilingual role-structured slide decks.

A deck is one JSON document. Every human-readable field is a map keyed by
language code, and validation rejects any map that is missing one of the
configured languages, so a loaded deck can be rendered for any role in any
configured language without further checks. Decks are immutable after
load and safe to share between threads.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType

from .config import DEFAULT_LANGUAGES
from .errors import EmptyDeck, MissingLanguage, OrdinalOutOfRange, SchemaError

ROLES = ("teacher", "student", "controller")


def _frozen_map(d: dict) -> MappingProxyType:
    return MappingProxyType(dict(d))


@dataclass(frozen=True)
class Slide:
    ordinal: int
    media: MappingProxyType            # optional "image" / "video" URIs
    teacher_script: MappingProxyType   # lang -> text
    teacher_instruction: MappingProxyType
    student_prompt: MappingProxyType
    hint_transcript: str               # in the deck's taught language
    hint_translation: MappingProxyType


@dataclass(frozen=True)
class SlideDeck:
    deck_id: str
    title: MappingProxyType
    taught_language: str
    level: int
    set_id: str
    set_ordinal: int
    slides: tuple
    vocabulary: tuple  # of lang->text maps

    def __len__(self):
        return len(self.slides)

    def slide(self, ordinal: int) -> Slide:
        if not 1 <= ordinal <= len(self.slides):
            raise OrdinalOutOfRange(f"ordinal {ordinal} not in 1..{len(self.slides)}")
        return self.slides[ordinal - 1]


@dataclass(frozen=True)
class RoleView:
    role: str
    ordinal: int
    visible_fields: MappingProxyType  # block name -> text
    media: MappingProxyType
    hint_available: bool
    hint_body: MappingProxyType | None  # {"transcript", "translation"} when active

    def field_names(self) -> frozenset:
        names = set(self.visible_fields)
        if self.hint_body is not None:
            names |= {"hint_transcript", "hint_translation"}
        return frozenset(names)


def _is_existing_path(source) -> bool:
    try:
        return Path(str(source)).exists()
    except OSError:  # e.g. a JSON document too long to be a file name
        return False


def _lang_map(raw, languages, where) -> MappingProxyType:
    if not isinstance(raw, dict):
        raise SchemaError(f"{where} must be a language map")
    for lang in languages:
        if lang not in raw or not isinstance(raw[lang], str):
            raise MissingLanguage(lang, where)
    return _frozen_map(raw)


def load_deck(source, languages=DEFAULT_LANGUAGES) -> SlideDeck:
    """Parse and validate one deck document.

    ``source`` may be a path, a JSON string, or an already-parsed dict.
    """
    if isinstance(source, (str, Path)) and _is_existing_path(source):
        source = Path(source).read_text()
    if isinstance(source, (str, bytes)):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"deck is not valid JSON: {exc}") from exc
    if not isinstance(source, dict):
        raise SchemaError("deck document must be an object")

    for key in ("deck_id", "title", "taught_language", "level", "set_id",
                "set_ordinal", "slides"):
        if key not in source:
            raise SchemaError(f"deck missing required key {key!r}")

    deck_id = source["deck_id"]
    taught = source["taught_language"]
    if taught not in languages:
        raise SchemaError(f"taught_language {taught!r} not in configured set")
    level = source["level"]
    if not isinstance(level, int) or level < 1:
        raise SchemaError("level must be a positive integer")
    set_ordinal = source["set_ordinal"]
    if not isinstance(set_ordinal, int) or set_ordinal < 1:
        raise SchemaError("set_ordinal must be a positive integer")

    raw_slides = source["slides"]
    if not isinstance(raw_slides, list):
        raise SchemaError("slides must be a list")
    if not raw_slides:
        raise EmptyDeck(f"deck {deck_id!r} has no slides")

    title = _lang_map(source["title"], languages, f"{deck_id}.title")

    vocabulary = []
    for i, entry in enumerate(source.get("vocabulary", []), 1):
        vocabulary.append(_lang_map(entry, languages, f"{deck_id}.vocabulary[{i}]"))

    slides = []
    for i, raw in enumerate(raw_slides, 1):
        if not isinstance(raw, dict):
            raise SchemaError(f"slide {i} must be an object")
        if raw.get("ordinal") != i:
            raise SchemaError(f"slide {i} has ordinal {raw.get('ordinal')!r}; "
                              "ordinals must be 1..N contiguous")
        where = f"slide {i}"
        media = raw.get("media", {})
        if not isinstance(media, dict) or set(media) - {"image", "video"}:
            raise SchemaError(f"{where}: media keys must be image/video")
        script = _lang_map(raw.get("teacher_script", {}), languages,
                           f"{where} teacher_script")
        transcript = raw.get("hint_transcript")
        if not isinstance(transcript, str):
            raise SchemaError(f"{where}: hint_transcript must be text")
        if transcript != script[taught]:
            raise SchemaError(
                f"{where}: hint_transcript does not match the "
                f"{taught} teacher_script")
        slides.append(Slide(
            ordinal=i,
            media=_frozen_map(media),
            teacher_script=script,
            teacher_instruction=_lang_map(raw.get("teacher_instruction", {}),
                                          languages, f"{where} teacher_instruction"),
            student_prompt=_lang_map(raw.get("student_prompt", {}),
                                     languages, f"{where} student_prompt"),
            hint_transcript=transcript,
            hint_translation=_lang_map(raw.get("hint_translation", {}),
                                       languages, f"{where} hint_translation"),
        ))

    return SlideDeck(
        deck_id=deck_id,
        title=title,
        taught_language=taught,
        level=level,
        set_id=source["set_id"],
        set_ordinal=set_ordinal,
        slides=tuple(slides),
        vocabulary=tuple(vocabulary),
    )


def load_content_dir(path, languages=DEFAULT_LANGUAGES) -> dict:
    """Load every ``*.json`` deck under a directory, keyed by deck_id."""
    decks = {}
    for f in sorted(Path(path).glob("*.json")):
        deck = load_deck(f, languages)
        if deck.deck_id in decks:
            raise SchemaError(f"duplicate deck_id {deck.deck_id!r} in {f}")
        decks[deck.deck_id] = deck
    return decks


def render_slide_view(deck: SlideDeck, ordinal: int, role: str, native: str,
                      hint_active: bool = False) -> RoleView:
    """Project one slide into what a given role sees in their own language.

    Pure: identical arguments always produce an identical view. The
    controller sees the union of the teacher and student fields.
    """
    slide = deck.slide(ordinal)
    if role not in ROLES:
        raise SchemaError(f"unknown role {role!r}")
    if native not in slide.student_prompt:
        raise MissingLanguage(native, f"slide {ordinal}")

    visible = {}
    if role in ("teacher", "controller"):
        visible["teacher_script"] = slide.teacher_script[native]
        visible["teacher_instruction"] = slide.teacher_instruction[native]
    if role in ("student", "controller"):
        visible["student_prompt"] = slide.student_prompt[native]

    hint_body = None
    if hint_active:
        hint_body = _frozen_map({
            "transcript": slide.hint_transcript,
            "translation": slide.hint_translation[native],
        })

    return RoleView(
        role=role,
        ordinal=ordinal,
        visible_fields=_frozen_map(visible),
        media=slide.media,
        hint_available=True,
        hint_body=hint_body,
    )


def deck_progress(cursor: int, deck: SlideDeck) -> dict:
    """Progress-bar numbers for a cursor position: fraction plus counts."""
    n = len(deck)
    if not 0 <= cursor <= n:
        raise OrdinalOutOfRange(f"cursor {cursor} not in 0..{n}")
    return {"fraction": cursor / n, "studied": cursor, "remaining": n - cursor}


def words_learned(deck: SlideDeck, cursor: int) -> int:
    """Vocabulary entries credited for reaching ``cursor``, pro-rata by slide."""
    n = len(deck)
    if not 0 <= cursor <= n:
        raise OrdinalOutOfRange(f"cursor {cursor} not in 0..{n}")
    return len(deck.vocabulary) * cursor // n
