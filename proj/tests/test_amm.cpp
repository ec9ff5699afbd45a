#include <catch2/catch_amalgamated.hpp>

#include "interpool/amm.hpp"

using namespace interpool;

namespace {

PoolState make_pool(const char* i, const char* n, const char* fee_rate = "0") {
    PoolState p;
    p.intertoken_inventory = Intertoken::from_string(i);
    p.native_inventory = Native::from_string(n);
    p.fee_policy.rate = Ratio::from_string(fee_rate);
    return p;
}

uint64_t splitmix(uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool product_not_below(const PoolState& pre, const PoolState& post) {
    auto before = detail::mul_u128(uint128(pre.intertoken_inventory.mantissa()),
                                   uint128(pre.native_inventory.mantissa()));
    auto after = detail::mul_u128(uint128(post.intertoken_inventory.mantissa()),
                                  uint128(post.native_inventory.mantissa()));
    return !(after < before);
}

}  // namespace

TEST_CASE("pool ratio") {
    CHECK(pool_ratio(make_pool("2", "5")).to_string() == "2.5");
    CHECK_THROWS_AS(pool_ratio(make_pool("0", "5")), std::domain_error);
}

TEST_CASE("fee-free quote is the exact curve solution") {
    auto pool = make_pool("10", "10");
    auto q = quote_swap(pool, ExchangeDirection::buy_intertoken,
                        Native::from_int(5).mantissa(), FeeMethod::native);
    // out = 10 - 100/15 = 3.333..., ceil on the kept side
    CHECK(q.new_native.to_string() == "15");
    CHECK(q.new_intertoken.to_string() == "6.666666666667");
    CHECK(Intertoken::from_mantissa(q.volume_out).to_string() == "3.333333333333");
    CHECK(q.fee == 0);
}

TEST_CASE("one percent fee grosses up the inbound intertoken leg") {
    auto pool = make_pool("1000", "1000", "0.01");
    auto q = quote_swap(pool, ExchangeDirection::sell_intertoken,
                        Intertoken::from_int(100).mantissa(), FeeMethod::intertoken);
    CHECK(q.fee_unit == Unit::intertoken);
    // 100 net to the curve costs 101.0101... all told
    CHECK(Intertoken::from_mantissa(q.fee).to_string() == "1.010101010101");
    CHECK(Intertoken::from_mantissa(q.fee).to_display() == "1.01");
    CHECK(Intertoken::from_mantissa(q.volume_in + q.fee).to_display() == "101.01");
    // curve unaffected by the fee
    CHECK(q.new_intertoken.to_string() == "1100");
}

TEST_CASE("fee on the outbound leg is skimmed from the fill") {
    auto pool = make_pool("1000", "1000", "0.01");
    auto q = quote_swap(pool, ExchangeDirection::sell_intertoken,
                        Intertoken::from_int(100).mantissa(), FeeMethod::native);
    CHECK(q.fee_unit == Unit::native);
    auto gross_out = pool.native_inventory.mantissa() - q.new_native.mantissa();
    CHECK(q.fee == detail::muldiv(gross_out, Ratio::from_string("0.01").mantissa(), kScale));
    CHECK(q.volume_out == gross_out - q.fee);
}

TEST_CASE("quote rejects bad volumes") {
    auto pool = make_pool("10", "10");
    CHECK_THROWS_AS(quote_swap(pool, ExchangeDirection::buy_intertoken, 0, FeeMethod::native),
                    std::invalid_argument);
    CHECK_THROWS_AS(quote_swap(make_pool("0", "0"), ExchangeDirection::buy_intertoken,
                               kScale, FeeMethod::native),
                    insufficient_liquidity);
}

TEST_CASE("constant product is preserved within one ulp across random swaps") {
    uint64_t seed = 7;
    auto pool = make_pool("1250", "3700", "0.003");
    for (int iter = 0; iter < 4000; ++iter) {
        PoolState pre = pool;
        auto dir = splitmix(seed) % 2 == 0 ? ExchangeDirection::buy_intertoken
                                           : ExchangeDirection::sell_intertoken;
        int128 vol = int128(splitmix(seed) % uint64_t(50 * kScale)) + 1;
        ExchangeOrder order{dir, vol, Ratio::from_mantissa(0),
                            Ratio::from_mantissa(detail::kMaxMantissaMag)};
        auto r = execute_swap(pool, order, FeeMethod::native);
        REQUIRE(r.executed);
        CHECK(curve_error_ulps(pre, pool) <= 1);
        CHECK(product_not_below(pre, pool));
    }
}

TEST_CASE("buys raise the ratio and sells lower it") {
    auto pool = make_pool("100", "100");
    auto before = pool_ratio(pool);
    ExchangeOrder buy{ExchangeDirection::buy_intertoken, Native::from_int(5).mantissa(),
                      Ratio::from_mantissa(0), Ratio::from_mantissa(detail::kMaxMantissaMag)};
    REQUIRE(execute_swap(pool, buy, FeeMethod::native).executed);
    auto mid = pool_ratio(pool);
    CHECK(mid > before);

    ExchangeOrder sell{ExchangeDirection::sell_intertoken, Intertoken::from_int(5).mantissa(),
                       Ratio::from_mantissa(0), Ratio::from_mantissa(detail::kMaxMantissaMag)};
    REQUIRE(execute_swap(pool, sell, FeeMethod::native).executed);
    CHECK(pool_ratio(pool) < mid);
}

TEST_CASE("ratio window is checked against the pre-trade ratio only") {
    auto pool = make_pool("10", "10");
    ExchangeOrder out_of_range{ExchangeDirection::buy_intertoken, Native::from_int(1).mantissa(),
                               Ratio::from_string("1.5"), Ratio::from_int(2)};
    auto r = execute_swap(pool, out_of_range, FeeMethod::native);
    CHECK_FALSE(r.executed);
    CHECK(r.reason == SkipReason::ratio_out_of_range);
    CHECK(pool.native_inventory == Native::from_int(10));

    // a big buy may push the post ratio past the window and still executes
    ExchangeOrder edge{ExchangeDirection::buy_intertoken, Native::from_int(10).mantissa(),
                       Ratio::from_string("0.9"), Ratio::from_string("1.1")};
    auto r2 = execute_swap(pool, edge, FeeMethod::native);
    CHECK(r2.executed);
    CHECK(pool_ratio(pool) > Ratio::from_string("1.1"));
}

TEST_CASE("execution order changes which transactions fit their windows") {
    ExchangeOrder big_buy{ExchangeDirection::buy_intertoken, Native::from_int(5).mantissa(),
                          Ratio::from_string("0.5"), Ratio::from_int(3)};
    ExchangeOrder tight{ExchangeDirection::buy_intertoken, Native::from_int(1).mantissa(),
                        Ratio::from_string("0.9"), Ratio::from_string("1.1")};

    auto pool1 = make_pool("10", "10");
    REQUIRE(execute_swap(pool1, big_buy, FeeMethod::native).executed);
    CHECK_FALSE(execute_swap(pool1, tight, FeeMethod::native).executed);

    auto pool2 = make_pool("10", "10");
    CHECK(execute_swap(pool2, tight, FeeMethod::native).executed);
    CHECK(execute_swap(pool2, big_buy, FeeMethod::native).executed);
}

TEST_CASE("position_at_ratio matches the closed form") {
    auto c10 = PoolCoins::from_int(10);
    auto p1 = position_at_ratio(c10, Ratio::from_string("2.5"));
    CHECK(p1.intertoken.to_string() == "2");
    CHECK(p1.native.to_string() == "5");

    auto p2 = position_at_ratio(c10, Ratio::from_int(5));
    CHECK(p2.intertoken.to_string() == "1.414213562373");
    CHECK(p2.native.to_string() == "7.071067811865");
    CHECK(p2.intertoken.to_display() == "1.41");
    CHECK(p2.native.to_display() == "7.07");

    auto p3 = position_at_ratio(c10, Ratio::from_int(10));
    CHECK(p3.intertoken.to_string() == "1");
    CHECK(p3.native.to_string() == "10");

    CHECK_THROWS_AS(position_at_ratio(c10, Ratio()), std::domain_error);
}

TEST_CASE("curve error metric flags off-curve states") {
    auto pre = make_pool("10", "10");
    auto post = make_pool("6", "15");  // exact solution is 6.666666666667
    CHECK(curve_error_ulps(pre, post) > 1);
}
