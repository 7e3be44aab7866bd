mod common;

use common::{duality_holds, reach};
use proptest::prelude::*;
use tumorseg_core::morphology::{close, connected_components, dilate, erode, open};
use tumorseg_core::{BinaryMask, StructuringElement};

fn mask() -> impl Strategy<Value = BinaryMask> {
    (1usize..16, 1usize..16).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<bool>(), w * h)
            .prop_map(move |bits| BinaryMask::new(w, h, bits).unwrap())
    })
}

fn mask_pair() -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
    (1usize..16, 1usize..16).prop_flat_map(|(w, h)| {
        (
            proptest::collection::vec(any::<bool>(), w * h),
            proptest::collection::vec(any::<bool>(), w * h),
        )
            .prop_map(move |(a, b)| {
                let small = BinaryMask::new(w, h, a.iter().zip(&b).map(|(x, y)| *x && *y).collect()).unwrap();
                (small, BinaryMask::new(w, h, a).unwrap())
            })
    })
}

/// Arbitrary (possibly asymmetric) element with odd sides up to 5.
fn any_se() -> impl Strategy<Value = StructuringElement> {
    (0usize..3, 0usize..3).prop_flat_map(|(a, b)| {
        let (w, h) = (2 * a + 1, 2 * b + 1);
        proptest::collection::vec(any::<bool>(), w * h)
            .prop_filter("needs a set bit", |bits| bits.iter().any(|&b| b))
            .prop_map(move |bits| StructuringElement::new(w, h, bits).unwrap())
    })
}

fn symmetric_se() -> impl Strategy<Value = StructuringElement> {
    prop_oneof![
        Just(StructuringElement::square(3).unwrap()),
        Just(StructuringElement::square(5).unwrap()),
        Just(StructuringElement::disk(1)),
        Just(StructuringElement::disk(2)),
    ]
}

fn with_origin(se: StructuringElement) -> StructuringElement {
    let (w, h) = (se.width(), se.height());
    let offsets = se.offsets();
    let bits = (0..w * h)
        .map(|i| {
            let (dx, dy) = ((i % w) as isize - (w / 2) as isize, (i / w) as isize - (h / 2) as isize);
            (dx, dy) == (0, 0) || offsets.contains(&(dx, dy))
        })
        .collect();
    StructuringElement::new(w, h, bits).unwrap()
}

proptest! {
    #[test]
    fn duality_symmetric(m in mask(), se in symmetric_se()) {
        prop_assert!(duality_holds(&m, &se));
    }

    #[test]
    fn duality_any_element(m in mask(), se in any_se()) {
        prop_assert!(duality_holds(&m, &se));
    }

    #[test]
    fn extensive_with_origin(m in mask(), se in any_se()) {
        let se = with_origin(se);
        prop_assert!(m.is_subset_of(&dilate(&m, &se)));
        prop_assert!(erode(&m, &se).is_subset_of(&m));
    }

    #[test]
    fn opening_closing_bracket(m in mask(), se in symmetric_se()) {
        prop_assert!(open(&m, &se).is_subset_of(&m));
        prop_assert!(m.is_subset_of(&close(&m, &se)));
    }

    #[test]
    fn monotone((small, big) in mask_pair(), se in any_se()) {
        prop_assert!(dilate(&small, &se).is_subset_of(&dilate(&big, &se)));
        prop_assert!(erode(&small, &se).is_subset_of(&erode(&big, &se)));
    }

    #[test]
    fn idempotent(m in mask(), se in symmetric_se()) {
        let o = open(&m, &se);
        prop_assert_eq!(open(&o, &se), o);
        let c = close(&m, &se);
        prop_assert_eq!(close(&c, &se), c);
    }

    #[test]
    fn components_partition_foreground(m in mask()) {
        let (w, h) = m.dims();
        let labels = connected_components(&m);
        let l = labels.labels();
        for (i, &b) in m.bits().iter().enumerate() {
            prop_assert_eq!(b, l[i] != 0);
        }
        // each label is exactly the flood-fill of any of its pixels
        for id in 1..=labels.max_label() {
            let start = l.iter().position(|&v| v == id);
            prop_assert!(start.is_some(), "label {} unused", id);
            let filled = reach(m.bits(), w, h, start.unwrap());
            let member: Vec<bool> = l.iter().map(|&v| v == id).collect();
            prop_assert_eq!(filled, member);
        }
    }
}
