import random

from hypothesis import given
from hypothesis import strategies as st

from diagraph.geometry import Line, Point
from diagraph.model import VISIT_COUNTER, DerivedObject, TaggedSet, leaf_tags, resolved_kind


def objs(tags):
    return [Line(t, Point(t, 0), Point(t, 5)) for t in tags]


class TestTaggedSet:
    def test_iteration_is_ascending_by_tag(self):
        ts = TaggedSet(objs([5, 1, 9, 3]))
        assert [o.tag for o in ts] == [1, 3, 5, 9]

    def test_no_duplicates(self):
        items = objs([2, 2, 2])
        ts = TaggedSet(items)
        assert len(ts) == 1

    @given(st.sets(st.integers(0, 500)), st.sets(st.integers(0, 500)))
    def test_set_algebra_matches_python_sets(self, a, b):
        ta, tb = TaggedSet(objs(a)), TaggedSet(objs(b))
        assert ta.intersect(tb).tags() == frozenset(a & b)
        assert ta.union(tb).tags() == frozenset(a | b)
        assert ta.difference(tb).tags() == frozenset(a - b)

    def test_intersection_visits_are_linear(self):
        rng = random.Random(3)
        for _ in range(50):
            a = objs(rng.sample(range(2000), rng.randint(0, 400)))
            b = objs(rng.sample(range(2000), rng.randint(0, 400)))
            ta, tb = TaggedSet(a), TaggedSet(b)
            VISIT_COUNTER["visits"] = 0
            ta.intersect(tb)
            assert VISIT_COUNTER["visits"] <= len(a) + len(b)


class TestDerivedObject:
    def test_leaf_tags_recursive(self):
        l1, l2 = objs([1, 2])
        inner = DerivedObject(tag=10, type_name="pair", display_type="Pair",
                              bbox=l1.bbox, constituents=(("a", l1), ("b", l2)))
        outer = DerivedObject(tag=11, type_name="wrap", display_type="Wrap",
                              bbox=l1.bbox, constituents=(("inner", inner), ("c", None)))
        assert leaf_tags(outer) == frozenset({1, 2})

    def test_resolved_kind_unwraps_single_constituent(self):
        l1 = objs([1])[0]
        wrap = DerivedObject(tag=10, type_name="data-point", display_type="Data-Point",
                             bbox=l1.bbox, constituents=(("line", l1),))
        assert resolved_kind(wrap) == "line"

    def test_resolved_kind_for_multi_part_objects(self):
        l1, l2 = objs([1, 2])
        group = DerivedObject(tag=10, type_name="ticks", display_type="Ticks",
                              bbox=l1.bbox, members=(l1, l2))
        assert resolved_kind(group) == "ticks"
