#include <doctest.h>

#include "incq/counted_map.hpp"
#include "incq/heap.hpp"

using namespace incq;

TEST_CASE("value ordering and equality") {
    CHECK(Value::integer(1) == Value::integer(1));
    CHECK(Value::integer(1) != Value::str("1"));
    CHECK(Value::obj(3) != Value::set(3)); // distinct reference spaces
    Value t1 = Value::tuple({Value::integer(1), Value::str("a")});
    Value t2 = Value::tuple({Value::integer(1), Value::str("a")});
    CHECK(t1 == t2);
    CHECK(t1.hash() == t2.hash());
    CHECK(Value::integer(1) < Value::integer(2));
}

TEST_CASE("counted add/del round-trip restores the exact prior state") {
    CountedSet s;
    CHECK(s.cadd(Value::integer(7)));
    CHECK(!s.cadd(Value::integer(7)));
    CHECK(s.count(Value::integer(7)) == 2);
    CHECK(!s.cdel(Value::integer(7)));
    CHECK(s.cdel(Value::integer(7)));
    CHECK(!s.contains(Value::integer(7)));
    CHECK(s.size() == 0);

    // Including absence: cadd then cdel of a fresh element leaves no trace.
    CountedMap m(true);
    Value k = Value::str("k");
    CHECK(m.cadd(k, Value::integer(1)));
    CHECK(m.cdel(k, Value::integer(1)));
    CHECK(!m.dom_contains(k));
    CHECK(m.live_size() == 0);
}

TEST_CASE("uncounted mode forbids counted ops and enforces presence rules") {
    CountedMap m(false);
    Value k = Value::integer(0);
    CHECK_THROWS_AS(m.cadd(k, Value::integer(1)), std::logic_error);
    m.add(k, Value::integer(1));
    CHECK_THROWS_AS(m.add(k, Value::integer(1)), std::logic_error);
    CHECK(!m.add_if_absent(k, Value::integer(1)));
    m.del(k, Value::integer(1));
    CHECK_THROWS_AS(m.del(k, Value::integer(1)), std::logic_error);
}

TEST_CASE("image iteration order is insertion order and survives churn") {
    CountedSet s;
    for (int i = 0; i < 40; ++i) s.cadd(Value::integer(i));
    for (int i = 0; i < 40; i += 2) s.cdel(Value::integer(i));
    ValueVec seen = s.to_vector();
    REQUIRE(seen.size() == 20);
    for (size_t i = 1; i < seen.size(); ++i)
        CHECK(seen[i - 1].as_int() < seen[i].as_int()); // odd numbers ascending
}

TEST_CASE("map live size counts keys plus image elements") {
    CountedMap m(true);
    m.cadd(Value::str("a"), Value::integer(1));
    m.cadd(Value::str("a"), Value::integer(2));
    m.cadd(Value::str("b"), Value::integer(3));
    CHECK(m.live_size() == 2 + 3);
}

TEST_CASE("heap fields are partial and sets have reference identity") {
    Heap h;
    Value o = h.new_object();
    Value s1 = h.new_set();
    Value s2 = h.new_set();
    CHECK(!h.has_field(o, "f"));
    CHECK(!h.set_field(o, "f", s1).has_value());
    CHECK(h.has_field(o, "f"));
    auto old = h.set_field(o, "f", s2);
    REQUIRE(old.has_value());
    CHECK(*old == s1);
    h.set_add(s1, o);
    CHECK(h.set_contains(s1, o));
    CHECK(!h.set_contains(s2, o));
}

TEST_CASE("image sets select components of matching tuples") {
    // R = {(1,2,3,4), (1,5,3,6)}; the image of (1,3) under R mapping
    // components (1,3) to (4,1) is {(4,1), (6,1)}.
    CountedMap keyed(false); // keyed map: components (1,3) -> components (4,1)
    auto tuple4 = [](int a, int b, int c, int d) {
        return ValueVec{Value::integer(a), Value::integer(b), Value::integer(c),
                        Value::integer(d)};
    };
    for (const ValueVec &row : {tuple4(1, 2, 3, 4), tuple4(1, 5, 3, 6)}) {
        Value key = pack_key({row[0], row[2]});
        Value val = pack_key({row[3], row[0]});
        keyed.add(key, val);
    }
    Value probe = pack_key({Value::integer(1), Value::integer(3)});
    const CountedSet *img = keyed.image(probe);
    REQUIRE(img != nullptr);
    CHECK(img->size() == 2);
    CHECK(img->contains(Value::tuple({Value::integer(4), Value::integer(1)})));
    CHECK(img->contains(Value::tuple({Value::integer(6), Value::integer(1)})));

    // Absent keys have empty images.
    CHECK(keyed.image(pack_key({Value::integer(9), Value::integer(3)})) == nullptr);
}
