use divlab::format::{parse_family, to_text};
use divlab_core::Family;
use proptest::prelude::*;

fn arb_family() -> impl Strategy<Value = Family> {
    (1usize..=63, any::<bool>()).prop_flat_map(|(n, uniform)| {
        let low = if n == 63 { u64::MAX >> 1 } else { (1u64 << n) - 1 };
        proptest::collection::vec(any::<u64>().prop_map(move |x| x & low), 0..30).prop_map(move |masks| {
            let masks: Vec<_> = masks.into_iter().map(divlab_core::SubsetMask::from_bits).collect();
            let fam = Family::from_masks(n, None, masks).unwrap();
            if uniform {
                // keep only members sized like the first one so the family is uniform
                let k = fam.members().first().map_or(0, |m| m.len());
                fam.filter(|m| m.len() == k).with_uniformity(Some(k)).unwrap()
            } else {
                fam
            }
        })
    })
}

proptest! {
    #[test]
    fn text_round_trip(fam in arb_family()) {
        let text = to_text(&fam);
        prop_assert_eq!(parse_family(&text).unwrap(), fam);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored(fam in arb_family()) {
        let text = to_text(&fam);
        let noisy: String = text.lines().map(|l| format!("{l}  # note\n\n")).collect();
        prop_assert_eq!(parse_family(&format!("# leading comment\n{noisy}")).unwrap(), fam);
    }
}
