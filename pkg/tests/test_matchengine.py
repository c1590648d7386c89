"""
Matching engine tests.

This module tests:
- Continuous price-time matching and partial fills
- The opening call auction price rule and allocation
- Cancels, the frozen window, the lunch queue and expiry at the close
- Agreement with the brute-force reference matcher
- Ledger files and the reference price/volume cross-check
"""
from datetime import date

import pytest

from lobnet.common.core.exceptions import ConfigError, EngineError
from lobnet.common.models.records import Aggressor, RestingOrder, SessionPhase, Side
from lobnet.common.models.schemas import CancelMode
from lobnet.common.utils.rng import STREAM_TEST, derive_rng
from lobnet.matchengine import (
    Canceled,
    MatchingEngine,
    NoOp,
    OrderBook,
    ReferenceMatcher,
    apply_cancel,
    call_auction_price,
    execute_call_auction,
    match_continuous,
    run_day,
)
from lobnet.matchengine.engine import NOOP_FILLED, NOOP_UNKNOWN
from lobnet.matchengine.ledger import (
    compare_with_reference,
    ledger_date,
    ledger_file_name,
    read_ledger,
    read_reference_series,
    write_ledger,
)
from lobnet.orderflow.phases import AFTERNOON_START, AUCTION_TIME, hms
from tests.test_utils import TEST_DATE, TestHelper


def rest(book: OrderBook, order_id: int, trader: str, side: Side, price: int, size: int, at: int) -> None:
    book.add(RestingOrder(order_id, trader, side, price, size, size, at))


# ============================================
# Continuous Matching Tests
# ============================================

@pytest.mark.unit
def test_bid_walks_the_ask_queue_in_arrival_order(star_day):
    """Test that one bid fills resting asks head first and the last one partially"""
    result = run_day(star_day)

    assert TestHelper.trade_tuples(result.trades) == [
        ("h", "x", 1000, 200),
        ("i", "x", 1000, 100),
        ("j", "x", 1000, 200),
    ]
    assert all(t.aggressor is Aggressor.BUY for t in result.trades)
    assert all(t.phase is SessionPhase.MORNING_CONTINUOUS for t in result.trades)
    assert [t.trade_id for t in result.trades] == [1, 2, 3]
    assert result.volume == 500


@pytest.mark.unit
def test_partial_fill_keeps_queue_position(star_day):
    """Test that the partially filled ask keeps the head of its level"""
    engine = MatchingEngine(snapshot_times=[hms(10, 0, 0, 11)])
    result = engine.run_day(star_day)

    (level,) = result.snapshots[hms(10, 0, 0, 11)]
    assert level.side is Side.ASK
    assert level.price == 1000
    assert level.queue == ((3, 100), (4, 100), (5, 200))
    assert level.depth == 400


@pytest.mark.unit
def test_sweep_trades_at_each_resting_price():
    """Test that a marketable bid sweeps two levels at the resting prices and rests the rest"""
    book = OrderBook()
    rest(book, 1, "a", Side.ASK, 1000, 100, 1)
    rest(book, 2, "b", Side.ASK, 1001, 100, 2)
    rest(book, 3, "c", Side.ASK, 1005, 100, 3)

    trades = match_continuous(book, TestHelper.bid(4, "x", 1002, 300, hms(10, 0)))

    assert [(t.seller_id, t.price, t.size) for t in trades] == [("a", 1000, 100), ("b", 1001, 100)]
    assert book.best_bid() == 1002
    assert book.orders[4].remaining == 100
    assert book.best_ask() == 1005
    assert not book.is_crossed()


@pytest.mark.unit
def test_sell_aggressor_hits_best_bid_first():
    """Test that an incoming ask trades with the highest bid before older lower bids"""
    book = OrderBook()
    rest(book, 1, "a", Side.BID, 998, 100, 1)
    rest(book, 2, "b", Side.BID, 999, 100, 2)

    trades = match_continuous(book, TestHelper.ask(3, "x", 998, 150, hms(10, 0)))

    assert [(t.buyer_id, t.price, t.size) for t in trades] == [("b", 999, 100), ("a", 998, 50)]
    assert all(t.aggressor is Aggressor.SELL for t in trades)
    assert book.orders[1].remaining == 50


@pytest.mark.unit
def test_cancel_event_is_not_a_submission():
    """Test that matching refuses a cancel"""
    with pytest.raises(EngineError):
        match_continuous(OrderBook(), TestHelper.cancel(1, "a", 2, hms(10, 0)))


# ============================================
# Call Auction Tests
# ============================================

@pytest.mark.unit
def test_auction_price_maximizes_volume_then_nears_prev_close():
    """Test that a flat volume curve resolves to the price nearest prev_close"""
    book = OrderBook()
    rest(book, 1, "b", Side.BID, 1010, 500, 1)
    rest(book, 2, "a", Side.ASK, 1000, 300, 2)

    assert call_auction_price(book, prev_close=1000) == (1000, 300)
    assert call_auction_price(book, prev_close=1008) == (1008, 300)
    assert call_auction_price(book, prev_close=1050) == (1010, 300)


@pytest.mark.unit
def test_auction_prefers_smaller_imbalance():
    """Test that among equal volumes the smaller bid/ask imbalance wins"""
    book = OrderBook()
    rest(book, 1, "b1", Side.BID, 1002, 100, 1)
    rest(book, 2, "b2", Side.BID, 1000, 100, 2)
    rest(book, 3, "a1", Side.ASK, 1000, 100, 3)

    # volume is 100 on 1000..1002; at 1000 demand is 200, above it 100
    assert call_auction_price(book, prev_close=1000) == (1001, 100)


@pytest.mark.unit
def test_auction_without_crossing():
    """Test that a book whose best bid is below the best ask has no clearing price"""
    book = OrderBook()
    rest(book, 1, "b", Side.BID, 990, 500, 1)
    rest(book, 2, "a", Side.ASK, 1000, 300, 2)
    assert call_auction_price(book, prev_close=1000) is None
    assert call_auction_price(OrderBook(), prev_close=1000) is None


@pytest.mark.unit
def test_auction_price_matches_exhaustive_scan():
    """Test the clearing price against a scan of every price on random books"""
    rng = derive_rng(21, STREAM_TEST)
    for _ in range(200):
        book = OrderBook()
        orders = []
        for order_id in range(1, int(rng.integers(2, 30)) + 1):
            side = Side.BID if rng.random() < 0.5 else Side.ASK
            price, size = 990 + int(rng.integers(0, 21)), 100 * int(rng.integers(1, 10))
            rest(book, order_id, f"t{order_id}", side, price, size, order_id)
            orders.append((side, price, size))
        prev_close = 990 + int(rng.integers(0, 21))

        scanned = []
        for p in range(990, 1011):
            demand = sum(s for side, q, s in orders if side is Side.BID and q >= p)
            supply = sum(s for side, q, s in orders if side is Side.ASK and q <= p)
            scanned.append((-min(demand, supply), abs(demand - supply), abs(p - prev_close), p))
        volume, _, _, price = min(scanned)

        expected = None if volume == 0 else (price, -volume)
        assert call_auction_price(book, prev_close) == expected


@pytest.mark.unit
def test_auction_allocation_pairs_in_priority_order():
    """Test that the auction pairs orders head to head at one clearing price"""
    book = OrderBook()
    for k, (trader, size) in enumerate([("h", 200), ("i", 100), ("j", 300)]):
        rest(book, k + 1, trader, Side.ASK, 1000, size, k)
    rest(book, 4, "x", Side.BID, 1000, 500, 10)

    price, volume = call_auction_price(book, prev_close=1000)
    auction = execute_call_auction(book, price)

    assert (price, volume, auction.executed_volume) == (1000, 500, 500)
    assert TestHelper.trade_tuples(auction.trades) == [
        ("h", "x", 1000, 200),
        ("i", "x", 1000, 100),
        ("j", "x", 1000, 200),
    ]
    assert all(t.timestamp == AUCTION_TIME and t.aggressor is Aggressor.AUCTION for t in auction.trades)
    assert list(book.orders) == [3]
    assert book.orders[3].remaining == 100


@pytest.mark.unit
def test_opening_auction_inside_a_day():
    """Test that orders collected from 9:15 clear at 9:25 and the rest carries into continuous trading"""
    day = TestHelper.day([
        TestHelper.bid(1, "b", 1010, 500, hms(9, 16)),
        TestHelper.ask(2, "a", 1000, 300, hms(9, 17)),
        TestHelper.ask(3, "c", 1010, 100, hms(9, 40)),
    ])
    result = run_day(day)

    assert result.auction is not None
    assert result.auction.clearing_price == 1000
    assert TestHelper.trade_tuples(result.trades) == [("a", "b", 1000, 300), ("c", "b", 1010, 100)]
    assert result.trades[1].phase is SessionPhase.MORNING_CONTINUOUS
    assert result.expired_orders == 1
    assert result.expired_shares == 100


# ============================================
# Cancel and Session Tests
# ============================================

@pytest.mark.unit
def test_cancel_removes_remaining_shares():
    """Test that a cancel removes whatever is left of its target"""
    book = OrderBook()
    rest(book, 1, "a", Side.ASK, 1000, 300, 1)

    assert apply_cancel(book, TestHelper.cancel(2, "a", 1, 5)) == Canceled(order_id=1, shares=300)
    assert len(book) == 0
    assert apply_cancel(book, TestHelper.cancel(3, "a", 1, 6)) == NoOp(NOOP_FILLED)


@pytest.mark.unit
def test_cancel_after_fill_is_noop(star_day):
    """Test that cancelling a filled order does nothing and a partial fill loses only its remainder"""
    t = hms(10, 1)
    day = TestHelper.day(list(star_day.events) + [
        TestHelper.cancel(7, "h", 1, t),
        TestHelper.cancel(8, "j", 3, t + 1),
    ])
    result = run_day(day)

    assert result.noop_cancels == 1
    assert result.unknown_cancels == 0
    assert result.canceled_orders == 1
    assert result.canceled_shares == 100


@pytest.mark.unit
def test_oldest_open_cancel_mode():
    """Test that a targetless cancel takes the trader's oldest resting order only in that mode"""
    book = OrderBook()
    rest(book, 1, "a", Side.ASK, 1005, 100, 1)
    rest(book, 2, "a", Side.ASK, 1000, 200, 2)
    cancel = TestHelper.cancel(3, "a", None, 5)

    assert apply_cancel(book, cancel) == NoOp(NOOP_UNKNOWN)
    assert apply_cancel(book, cancel, CancelMode.OLDEST_OPEN) == Canceled(order_id=1, shares=100)


@pytest.mark.unit
def test_frozen_cancel_waits_for_the_auction():
    """Test that a cancel sent in the frozen window applies only to what the auction left"""
    day = TestHelper.day([
        TestHelper.ask(1, "a", 1000, 300, hms(9, 16)),
        TestHelper.bid(2, "b", 1000, 100, hms(9, 17)),
        TestHelper.cancel(3, "a", 1, hms(9, 21)),
    ])
    result = run_day(day)

    assert TestHelper.trade_tuples(result.trades) == [("a", "b", 1000, 100)]
    assert result.canceled_shares == 200
    assert result.expired_orders == 0


@pytest.mark.unit
def test_early_auction_cancel_applies_at_once():
    """Test that a cancel before 9:20 pulls the order out of the auction"""
    day = TestHelper.day([
        TestHelper.ask(1, "a", 1000, 300, hms(9, 16)),
        TestHelper.bid(2, "b", 1000, 100, hms(9, 17)),
        TestHelper.cancel(3, "a", 1, hms(9, 18)),
    ])
    result = run_day(day)

    assert result.trades == ()
    assert result.auction is None
    assert result.canceled_shares == 300


@pytest.mark.unit
def test_lunch_orders_queue_until_the_afternoon():
    """Test that lunch-break submissions match at 13:00 in arrival order"""
    day = TestHelper.day([
        TestHelper.ask(1, "a", 1000, 100, hms(11, 0)),
        TestHelper.bid(2, "b", 1000, 60, hms(11, 45)),
        TestHelper.bid(3, "c", 1000, 60, hms(12, 10)),
        TestHelper.cancel(4, "a", 1, hms(12, 30)),
    ])
    engine = MatchingEngine(snapshot_times=[hms(12, 59)])
    result = engine.run_day(day)

    assert len(result.snapshots[hms(12, 59)]) == 1
    assert TestHelper.trade_tuples(result.trades) == [("a", "b", 1000, 60), ("a", "c", 1000, 40)]
    assert all(t.timestamp == AFTERNOON_START for t in result.trades)
    assert all(t.phase is SessionPhase.AFTERNOON_CONTINUOUS for t in result.trades)
    assert result.noop_cancels == 1
    assert result.expired_shares == 20


@pytest.mark.unit
def test_unknown_cancel_target_counted():
    """Test that a cancel naming an order never seen is counted as unknown"""
    day = TestHelper.day([TestHelper.cancel(1, "a", 99, hms(10, 0))])
    result = run_day(day)
    assert (result.noop_cancels, result.unknown_cancels) == (1, 1)


@pytest.mark.unit
def test_submission_outside_hours_is_refused():
    """Test that the engine refuses unvalidated closed-phase submissions"""
    day = TestHelper.day([TestHelper.bid(1, "a", 1000, 100, hms(16, 0))])
    with pytest.raises(EngineError):
        run_day(day)


@pytest.mark.unit
def test_empty_day():
    """Test that a day without events replays to an empty ledger"""
    result = run_day(TestHelper.day([]))
    assert result.trades == ()
    assert result.ratios.r is None


# ============================================
# Reference Matcher Tests
# ============================================

@pytest.mark.unit
def test_engine_agrees_with_reference_matcher(synthetic_days):
    """Test that the engine and the brute-force matcher produce identical ledgers"""
    for day in synthetic_days:
        engine = MatchingEngine(check_invariants=True).run_day(day)
        assert list(engine.trades) == ReferenceMatcher().run_day(day)


@pytest.mark.slow
def test_engine_agrees_with_reference_on_busy_days():
    """Test ledger agreement on larger days with more cancels"""
    for seed in range(5):
        day = TestHelper.synthetic_day(100 + seed, events=3000, traders=80, cancel_prob=0.3)
        assert list(run_day(day).trades) == ReferenceMatcher().run_day(day)


@pytest.mark.integration
def test_engine_agrees_with_reference_over_many_days():
    """Test ledger agreement on 500 seeded days of at most 200 events across every phase"""
    for seed in range(500):
        day = TestHelper.synthetic_day(1000 + seed, events=50 + seed % 151, traders=5 + seed % 40)
        assert list(run_day(day).trades) == ReferenceMatcher().run_day(day), f"day seed {1000 + seed}"


@pytest.mark.unit
def test_replay_is_deterministic():
    """Test that replaying a day twice yields identical results"""
    day = TestHelper.synthetic_day(3, events=500)
    first, second = run_day(day), run_day(day)
    assert first.trades == second.trades
    assert first.ratios == second.ratios
    assert first.canceled_shares == second.canceled_shares


@pytest.mark.unit
def test_every_trade_is_conserved(synthetic_days):
    """Test that traded shares never exceed what the orders offered"""
    for day in synthetic_days:
        trades = run_day(day).trades
        sizes = {e.order_id: e.size for e in day.events if not e.is_cancel}
        filled: dict[int, int] = {}
        for trade in trades:
            assert trade.size > 0
            for order_id in (trade.bid_order_id, trade.ask_order_id):
                filled[order_id] = filled.get(order_id, 0) + trade.size
        assert all(filled[o] <= sizes[o] for o in filled)


# ============================================
# Ledger File Tests
# ============================================

@pytest.mark.unit
def test_ledger_file_round_trip(tmp_path, star_day):
    """Test that a written ledger reads back to the same trades"""
    trades = run_day(star_day).trades
    path = write_ledger(tmp_path / ledger_file_name(TEST_DATE), trades, "cd" * 32)

    assert path.name == "20030103_trades.csv"
    assert path.read_text().startswith("# lobnet")
    assert read_ledger(path) == list(trades)
    assert ledger_date(path) == TEST_DATE


@pytest.mark.unit
def test_reference_series_cross_check(tmp_path, star_day):
    """Test that the reconstruction is compared with a reference close and volume"""
    reference = tmp_path / "reference.csv"
    reference.write_text("date,close,volume\n2003-01-03,10.00,500\n20030106,1010,900\n")
    series = read_reference_series(reference)
    trades = run_day(star_day).trades

    same = compare_with_reference(TEST_DATE, trades, series)
    assert (same.price_diff, same.volume_diff) == (0, 0)

    off = compare_with_reference(date(2003, 1, 6), trades[:1], series)
    assert off.price_diff == 10
    assert off.volume_diff == -700

    assert compare_with_reference(date(2003, 1, 7), trades, series) is None


@pytest.mark.unit
@pytest.mark.parametrize("row", ["2003-13-40,10.00,500", "2003-01-03,ten,500", "2003-01-03,10.00,lots", "2003-01-03,10.00"])
def test_malformed_reference_series_is_a_config_error(tmp_path, row):
    """Test that a bad date, price or volume in the reference series is reported, not raised raw"""
    reference = tmp_path / "reference.csv"
    reference.write_text(f"date,close,volume\n{row}\n")
    with pytest.raises(ConfigError) as failure:
        read_reference_series(reference)
    assert "row 1" in str(failure.value)
