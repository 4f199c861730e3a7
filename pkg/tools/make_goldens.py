"""Regenerate the golden role-view fixtures.

Deliberately independent of the server package: expected views are built
by direct key lookups into the raw deck JSON, so the goldens cannot
inherit a rendering bug. Run from the repository root:

    python3 tools/make_goldens.py
"""

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
DECK_FILE = ROOT / "content" / "greetings-a1.json"
OUT_FILE = ROOT / "tests" / "golden" / "role_views.json"

LANGUAGES = ("en", "es", "ru", "de")
ROLES = ("teacher", "student", "controller")


def expected_view(slide: dict, taught: str, role: str, lang: str,
                  hint: bool) -> dict:
    visible = {}
    if role in ("teacher", "controller"):
        visible["teacher_script"] = slide["teacher_script"][lang]
        visible["teacher_instruction"] = slide["teacher_instruction"][lang]
    if role in ("student", "controller"):
        visible["student_prompt"] = slide["student_prompt"][lang]
    hint_body = None
    if hint:
        hint_body = {
            "transcript": slide["teacher_script"][taught],
            "translation": slide["hint_translation"][lang],
        }
    return {
        "role": role,
        "ordinal": slide["ordinal"],
        "visible_fields": visible,
        "media": slide.get("media", {}),
        "hint_available": True,
        "hint_body": hint_body,
    }


def main():
    deck = json.loads(DECK_FILE.read_text())
    taught = deck["taught_language"]
    golden = {}
    for slide in deck["slides"]:
        for role in ROLES:
            for lang in LANGUAGES:
                for hint in (False, True):
                    key = (f"{deck['deck_id']}:{slide['ordinal']}:{role}:"
                           f"{lang}:{'hint' if hint else 'plain'}")
                    golden[key] = expected_view(slide, taught, role, lang, hint)
    OUT_FILE.parent.mkdir(parents=True, exist_ok=True)
    OUT_FILE.write_text(json.dumps(golden, indent=2, ensure_ascii=False,
                                   sort_keys=True) + "\n")
    print(f"wrote {len(golden)} golden views to {OUT_FILE}")


if __name__ == "__main__":
    main()
