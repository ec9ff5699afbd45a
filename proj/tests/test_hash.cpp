#include <catch2/catch_amalgamated.hpp>

#include "interpool/hash.hpp"

using namespace interpool;

TEST_CASE("sha256 matches published vectors") {
    CHECK(hash256("").hex() ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(hash256("abc").hex() ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(hash256("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq").hex() ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");

    // incremental updates agree with one-shot hashing
    std::string long_msg(1000, 'a');
    detail::Sha256 inc;
    inc.update(reinterpret_cast<const uint8_t*>(long_msg.data()), 500);
    inc.update(reinterpret_cast<const uint8_t*>(long_msg.data()) + 500, 500);
    CHECK(inc.finalize() == hash256(long_msg));
}

TEST_CASE("bit indexing reads the hex string left to right") {
    // e3 = 1110 0011
    auto h = hash256("");
    CHECK(h.bytes[0] == 0xe3);
    int expected[8] = {1, 1, 1, 0, 0, 0, 1, 1};
    for (int b = 0; b < 8; ++b) CHECK(h.bit(size_t(b)) == expected[b]);
    CHECK(h.first_bit() == 1);
    // last byte 0x55 = 0101 0101
    CHECK(h.last_bit() == 1);
    CHECK(h.bit(248) == 0);

    CHECK_THROWS_AS(h.bit(256), std::out_of_range);
}

TEST_CASE("set_bit and flip round trip") {
    Hash256 h;
    h.set_bit(0, 1);
    CHECK(h.bytes[0] == 0x80);
    h.set_bit(255, 1);
    CHECK(h.bytes[31] == 0x01);
    h.set_bit(0, 0);
    CHECK(h.bytes[0] == 0x00);

    auto g = hash256("abc");
    CHECK(g.with_flipped_bit(13).with_flipped_bit(13) == g);
    CHECK(g.with_flipped_bit(13) != g);
}

TEST_CASE("bit disassembly and reassembly is lossless") {
    auto h = hash256("round trip");
    Hash256 rebuilt;
    for (size_t b = 0; b < 256; ++b) rebuilt.set_bit(b, h.bit(b));
    CHECK(rebuilt == h);
}

TEST_CASE("hex round trip and validation") {
    auto h = hash256("abc");
    CHECK(Hash256::from_hex(h.hex()) == h);
    CHECK_THROWS_AS(Hash256::from_hex("123"), std::invalid_argument);
    CHECK_THROWS_AS(Hash256::from_hex(std::string(64, 'g')), std::invalid_argument);
}
