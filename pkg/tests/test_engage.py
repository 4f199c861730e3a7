import pytest

from peertutor.engage import DeckCatalog, Engage, SessionRecord, month_of
from peertutor.errors import (DuplicateRating, NotParticipant, OutOfRange,
                              TokenAlreadyRedeemed, UnknownSession,
                              UnknownToken, UnknownUser)

MAY = 1746057600.0   # 2025-05-01T00:00:00Z
JUNE = 1748736000.0  # 2025-06-01T00:00:00Z


def record(session_id, teacher="tina", student="sam", deck="greetings-a1",
           set_id="set-1", duration=60, completed=False, ended_at=MAY):
    return SessionRecord(
        session_id=session_id, teacher_id=teacher, student_id=student,
        deck_id=deck, set_id=set_id, duration_s=duration,
        deck_completed=completed, words_learned=0, ended_at=ended_at)


@pytest.fixture
def engage(decks):
    return Engage(DeckCatalog(decks), expert_threshold=5)


def test_month_of_is_utc():
    assert month_of(MAY) == "2025-05"
    assert month_of(MAY - 1) == "2025-04"
    assert month_of(JUNE) == "2025-06"


def test_catalog_orders_sets_and_decks(decks):
    catalog = DeckCatalog(decks)
    assert catalog.set_ids == ["set-1", "set-2"]
    assert catalog.sets["set-1"] == ["greetings-a1", "numbers-a1"]
    assert catalog.first_set() == "set-1"
    assert catalog.next_set("set-1") == "set-2"
    assert catalog.next_set("set-2") is None


# -- ratings ---------------------------------------------------------------------


def test_rating_flow(engage):
    engage.on_session_end(record("session-1"), MAY)
    engage.record_rating("sam", "session-1", 5, MAY)
    engage.record_rating("tina", "session-1", 3, MAY)
    assert engage.avg_rating("tina") == (5.0, 1)
    assert engage.avg_rating("sam") == (3.0, 1)
    assert engage.avg_rating("ghost") == (0.0, 0)


def test_rating_guards(engage):
    engage.on_session_end(record("session-1"), MAY)
    with pytest.raises(OutOfRange):
        engage.record_rating("sam", "session-1", 0, MAY)
    with pytest.raises(OutOfRange):
        engage.record_rating("sam", "session-1", 6, MAY)
    with pytest.raises(UnknownSession):
        engage.record_rating("sam", "session-404", 4, MAY)
    with pytest.raises(NotParticipant):
        engage.record_rating("eve", "session-1", 4, MAY)
    engage.record_rating("sam", "session-1", 4, MAY)
    with pytest.raises(DuplicateRating):
        engage.record_rating("sam", "session-1", 5, MAY)


# -- leaderboard -----------------------------------------------------------------


def test_leaderboard_buckets_by_month_and_sorts(engage):
    engage.on_session_end(record("session-1", duration=100), MAY)
    engage.on_session_end(record("session-2", teacher="tina", student="uma",
                                 duration=50), MAY)
    engage.on_session_end(record("session-3", duration=999, ended_at=JUNE), MAY)
    rows = engage.leaderboard("2025-05")
    assert rows[0] == {"user_id": "tina", "activity_seconds": 150}
    assert {"user_id": "sam", "activity_seconds": 100} in rows
    assert {"user_id": "uma", "activity_seconds": 50} in rows
    # ties break by user id so the board is stable
    june = engage.leaderboard("2025-06")
    assert [r["user_id"] for r in june] == ["sam", "tina"]


def test_leaderboard_conserves_session_seconds(engage):
    durations = [60, 120, 45]
    for i, d in enumerate(durations, 1):
        engage.on_session_end(record(f"session-{i}", duration=d), MAY)
    rows = engage.leaderboard("2025-05", limit=100)
    assert sum(r["activity_seconds"] for r in rows) == 2 * sum(durations)


# -- unlocks ---------------------------------------------------------------------


def complete(engage, session_id, deck, set_id="set-1", student="sam"):
    engage.on_session_end(record(session_id, deck=deck, set_id=set_id,
                                 student=student, completed=True), MAY)


def test_first_set_is_always_unlocked(engage):
    assert engage.unlocked_sets("newcomer") == {"set-1"}


def test_set_unlocks_only_when_whole_set_complete(engage):
    complete(engage, "session-1", "greetings-a1")
    assert engage.unlocked_sets("sam") == {"set-1"}
    complete(engage, "session-2", "numbers-a1")
    assert engage.unlocked_sets("sam") == {"set-1", "set-2"}


def test_incomplete_session_does_not_count(engage):
    complete(engage, "session-1", "greetings-a1")
    engage.on_session_end(record("session-2", deck="numbers-a1",
                                 completed=False), MAY)
    assert engage.unlocked_sets("sam") == {"set-1"}


def test_controller_repeat_blocks_unlock_until_advance(engage):
    engage.controller_decide("sam", "set-1", "repeat")
    complete(engage, "session-1", "greetings-a1")
    complete(engage, "session-2", "numbers-a1")
    assert "set-2" not in engage.unlocked_sets("sam")
    unlocked = engage.controller_decide("sam", "set-1", "advance")
    assert "set-2" in unlocked


def test_controller_repeat_after_unlock_is_inert(engage):
    complete(engage, "session-1", "greetings-a1")
    complete(engage, "session-2", "numbers-a1")
    engage.controller_decide("sam", "set-1", "repeat")
    assert "set-2" in engage.unlocked_sets("sam")


def test_controller_decision_validated(engage):
    with pytest.raises(OutOfRange):
        engage.controller_decide("sam", "set-1", "maybe")


# -- accolades ---------------------------------------------------------------------


def test_expert_at_exactly_fifth_completed_teaching_session(engage):
    for i in range(1, 5):
        complete(engage, f"session-{i}", "greetings-a1", student=f"s{i}")
        assert not engage.has_accolade("tina", "expert")
    effects = complete_and_effects(engage, "session-5", "s5")
    assert engage.has_accolade("tina", "expert")
    assert ("expert", "tina") in effects["accolades"]
    # a sixth completion does not award twice
    complete(engage, "session-6", "greetings-a1", student="s6")
    assert sum(1 for a in engage.accolades if a.kind == "expert") == 1


def complete_and_effects(engage, session_id, student):
    return engage.on_session_end(
        record(session_id, deck="greetings-a1", student=student,
               completed=True), MAY)


def test_uncompleted_sessions_never_count_toward_expert(engage):
    for i in range(1, 10):
        engage.on_session_end(record(f"session-{i}", student=f"s{i}",
                                     completed=False), MAY)
    assert not engage.has_accolade("tina", "expert")


def test_badges_awarded_from_counters(engage):
    engage.on_session_end(record("session-1"), MAY)
    assert engage.has_accolade("tina", "badge:first-lesson")
    assert engage.has_accolade("sam", "badge:first-lesson")
    assert not engage.has_accolade("tina", "badge:polyglot-helper")
    complete(engage, "session-2", "greetings-a1")
    assert engage.has_accolade("tina", "badge:polyglot-helper")


def test_session_end_is_idempotent(engage):
    engage.on_session_end(record("session-1"), MAY)
    effects = engage.on_session_end(record("session-1"), MAY)
    assert effects == {"duplicate": True}
    assert engage.counters["tina"]["sessions_total"] == 1


# -- sharing and invites -------------------------------------------------------------


def test_invite_tokens_single_use(engage):
    event = engage.share_event("tina", "invite", MAY)
    token = event["token"]
    assert engage.redeem_token(token, "newbie") == "tina"
    with pytest.raises(TokenAlreadyRedeemed):
        engage.redeem_token(token, "other")
    with pytest.raises(UnknownToken):
        engage.redeem_token("inv-404", "newbie")


def test_user_redeems_at_most_one_referral(engage):
    t1 = engage.share_event("tina", "invite", MAY)["token"]
    t2 = engage.share_event("tina", "invite", MAY)["token"]
    engage.redeem_token(t1, "newbie")
    with pytest.raises(TokenAlreadyRedeemed):
        engage.redeem_token(t2, "newbie")
    assert t2 not in engage.redeemed  # rejected before any mutation


def test_cannot_redeem_own_token(engage):
    token = engage.share_event("tina", "invite", MAY)["token"]
    with pytest.raises(UnknownUser):
        engage.redeem_token(token, "tina")


def test_lesson_result_share_has_no_token(engage):
    event = engage.share_event("tina", "lesson_result", MAY)
    assert "token" not in event
    with pytest.raises(OutOfRange):
        engage.share_event("tina", "selfie", MAY)


# -- persistence ---------------------------------------------------------------------


def test_state_round_trip(engage, decks):
    complete(engage, "session-1", "greetings-a1")
    engage.record_rating("sam", "session-1", 5, MAY)
    engage.controller_decide("sam", "set-1", "repeat")
    token = engage.share_event("tina", "invite", MAY)["token"]
    engage.redeem_token(token, "newbie")
    clone = Engage.from_state_dict(engage.state_dict(), DeckCatalog(decks))
    assert clone.state_dict() == engage.state_dict()
    assert clone.avg_rating("tina") == engage.avg_rating("tina")
    with pytest.raises(DuplicateRating):
        clone.record_rating("sam", "session-1", 4, MAY)
