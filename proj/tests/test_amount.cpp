#include <catch2/catch_amalgamated.hpp>

#include "interpool/amount.hpp"

using namespace interpool;

namespace {

uint64_t splitmix(uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

TEST_CASE("parse and format round trip") {
    CHECK(Native::from_string("10.0").mantissa() == int128(10) * kScale);
    CHECK(Native::from_string("10").mantissa() == int128(10) * kScale);
    CHECK(Native::from_string("0.000000000001").mantissa() == 1);
    CHECK(Native::from_string("-2.5").mantissa() == int128(-25) * kScale / 10);
    CHECK(Native::from_string("3.162277660168").to_string() == "3.162277660168");
    CHECK(Native::from_mantissa(0).to_string() == "0");
    CHECK(Native::from_string("7.10").to_string() == "7.1");

    CHECK_THROWS_AS(Native::from_string("1.0000000000001"), std::invalid_argument);
    CHECK_THROWS_AS(Native::from_string(""), std::invalid_argument);
    CHECK_THROWS_AS(Native::from_string("12a"), std::invalid_argument);
    CHECK_THROWS_AS(Native::from_string("-"), std::invalid_argument);
}

TEST_CASE("addition and subtraction are exact and checked") {
    auto a = Native::from_string("1.25");
    auto b = Native::from_string("2.75");
    CHECK((a + b).to_string() == "4");
    CHECK((a - b).to_string() == "-1.5");

    auto huge = Native::from_mantissa(int128(detail::kMaxMantissaMag));
    CHECK_THROWS_AS(huge + Native::from_mantissa(1), std::overflow_error);
    CHECK_THROWS_AS(-huge - Native::from_mantissa(2), std::overflow_error);
}

TEST_CASE("mul and div truncate toward zero") {
    auto seven = Native::from_int(7);
    CHECK(mul(seven, Ratio::from_string("0.5")).to_string() == "3.5");
    CHECK(mul(-seven, Ratio::from_string("0.5")).to_string() == "-3.5");

    // 7 * 0.333333333333 = 2.333333333331 exactly at this scale
    CHECK(mul(seven, Ratio::from_string("0.333333333333")).to_string() == "2.333333333331");
    CHECK(mul(-seven, Ratio::from_string("0.333333333333")).to_string() == "-2.333333333331");

    CHECK(div(Native::from_int(1), Ratio::from_int(3)).to_string() == "0.333333333333");
    CHECK_THROWS_AS(div(seven, Ratio()), std::domain_error);
}

TEST_CASE("muldiv survives large intermediates") {
    // 10^20 * 1.0 would overflow a 128-bit product of mantissas but the
    // result itself fits.
    auto big = Native::from_string("100000000000000000000");
    CHECK(mul(big, Ratio::from_int(1)) == big);
    CHECK_THROWS_AS(mul(big, Ratio::from_mantissa(detail::kMaxMantissaMag)),
                    std::overflow_error);
}

TEST_CASE("amount_sqrt is the floor square root") {
    CHECK(amount_sqrt(Native::from_int(10)).to_string() == "3.162277660168");
    CHECK(amount_sqrt(Native::from_int(2)).to_string() == "1.414213562373");
    CHECK(amount_sqrt(Native::from_int(4)).to_string() == "2");
    CHECK(amount_sqrt(Native::from_int(0)).to_string() == "0");
    CHECK(amount_sqrt(Native::from_int(1'000'000'000'000)).to_string() == "1000000");
    CHECK_THROWS_AS(amount_sqrt(Native::from_int(-1)), std::domain_error);
}

TEST_CASE("amount_sqrt floor contract holds on random inputs") {
    uint64_t seed = 20260823;
    for (int iter = 0; iter < 2000; ++iter) {
        uint128 m = uint128(splitmix(seed));
        m = (m << 32) | splitmix(seed) % 0xffffffffULL;
        m %= uint128(1'000'000'000'000ULL) * uint128(kScale);  // up to 10^12 units
        int128 r = detail::sqrt_mantissa(int128(m));
        auto radicand = detail::mul_u128(m, uint128(kScale));
        auto low = detail::mul_u128(uint128(r), uint128(r));
        auto high = detail::mul_u128(uint128(r) + 1, uint128(r) + 1);
        CHECK(!(radicand < low));
        CHECK(radicand < high);
    }
}

TEST_CASE("display rounding is half-even at two decimals") {
    CHECK(Native::from_string("2.005").to_display() == "2.00");
    CHECK(Native::from_string("2.015").to_display() == "2.02");
    CHECK(Native::from_string("2.0051").to_display() == "2.01");
    CHECK(Native::from_string("2.0049").to_display() == "2.00");
    CHECK(Native::from_string("-1.005").to_display() == "-1.00");
    CHECK(Native::from_string("-5").to_display() == "-5.00");
    CHECK(Native::from_string("9.142135623731").to_display() == "9.14");
}

TEST_CASE("conversion helpers") {
    CHECK(ratio_of(Native::from_int(5), Intertoken::from_int(2)).to_string() == "2.5");
    CHECK(to_native(Intertoken::from_int(2), Ratio::from_string("2.5")).to_string() == "5");
    CHECK(to_intertoken(Native::from_int(5), Ratio::from_string("2.5")).to_string() == "2");
    CHECK(coins_of(Intertoken::from_int(2), Native::from_int(5)).to_string() == "10");
    CHECK(fee_value(GasAmount::from_int(21000), Ratio::from_string("0.000000001")).to_string() ==
          "0.000021");
    CHECK(from_alien(to_alien(Intertoken::from_string("0.59"))).to_string() == "0.59");
}
