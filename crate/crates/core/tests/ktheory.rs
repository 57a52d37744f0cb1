use proptest::prelude::*;
use roelab::ktheory::*;

/// K-groups of a point, written out by hand.
fn point_k(field: Field, i: i64) -> &'static str {
    const REAL: [&str; 8] = ["Z", "Z/2", "Z/2", "0", "Z", "0", "0", "0"];
    const COMPLEX: [&str; 2] = ["Z", "0"];
    match field {
        Field::Real => REAL[i.rem_euclid(8) as usize],
        Field::Complex => COMPLEX[i.rem_euclid(2) as usize],
    }
}

/// Counts of (Z, Z/2) summands in `K_i` of the d-torus by the Pimsner-Voiculescu
/// recursion `K_i(T^d) = K_i(T^{d-1}) + K_{i-1}(T^{d-1})`.
fn torus_counts(field: Field, d: usize, i: i64) -> (usize, usize) {
    if d == 0 {
        return match point_k(field, i) {
            "Z" => (1, 0),
            "Z/2" => (0, 1),
            _ => (0, 0),
        };
    }
    let a = torus_counts(field, d - 1, i);
    let b = torus_counts(field, d - 1, i - 1);
    (a.0 + b.0, a.1 + b.1)
}

fn counts(g: &Group) -> (usize, usize) {
    let z = g.summands().iter().filter(|c| **c == Cyclic::Z).count();
    (z, g.summands().len() - z)
}

fn field() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Field::Real), Just(Field::Complex)]
}

proptest! {
    #[test]
    fn field_k_matches_table(f in field(), i in -40i64..40) {
        prop_assert_eq!(k_of_field(f).degree(i).to_string(), point_k(f, i));
    }

    #[test]
    fn kitaev_entries_are_bott_periodic_and_diagonal(f in field(), s in -20i64..20, d in 0i64..12) {
        let e = kitaev_entry(f, s, d);
        prop_assert_eq!(&kitaev_entry(f, s + f.period(), d), &e);
        prop_assert_eq!(&kitaev_entry(f, s, d + f.period()), &e);
        prop_assert_eq!(&kitaev_entry(f, s + 1, d + 1), &e);
        prop_assert_eq!(e.to_string(), point_k(f, s - d));
    }

    #[test]
    fn torus_module_expands_like_pimsner_voiculescu(f in field(), d in 0usize..7, i in -10i64..10) {
        let m = torus_k(d, f);
        prop_assert_eq!(m.rank(), 1 << d);
        prop_assert_eq!(counts(m.expand().degree(i)), torus_counts(f, d, i));
    }

    #[test]
    fn comparison_map_keeps_only_the_top_generator(f in field(), d in 1usize..7, i in -10i64..10) {
        let c = comparison_map(d, f).unwrap();
        prop_assert_eq!(c.kernel_rank() + c.image_rank(), 1 << d);
        prop_assert_eq!(c.image_rank(), 1);
        let image = c.image_group();
        prop_assert_eq!(image.degree(i), c.target.degree(i));
        prop_assert_eq!(c.target.degree(i).to_string(), point_k(f, i - d as i64));
    }

    #[test]
    fn mayer_vietoris_chain_reaches_the_point(f in field(), d in 1usize..7, j in -10i64..10) {
        let chain = mv_composite(d, f, j).unwrap();
        prop_assert_eq!(chain.len(), d);
        prop_assert!(chain.iter().all(|b| b.isomorphism && b.sign == 1));
        for w in chain.windows(2) {
            prop_assert_eq!(&w[0].target, &w[1].source);
        }
        prop_assert_eq!(chain.last().unwrap().target.to_string(), point_k(f, j - d as i64));
    }
}

#[test]
fn degenerate_dimensions_are_rejected() {
    assert!(comparison_map(0, Field::Complex).is_err());
    assert!(mv_boundary(0, Field::Real, 0).is_err());
    assert!(mv_composite(0, Field::Real, 0).unwrap().is_empty());
}

#[test]
fn table_rows_follow_class_labels() {
    let t = kitaev_table(0..=3, None);
    assert_eq!(t.rows.len(), 10);
    let labels: Vec<&str> = t.rows.iter().map(|r| r.label).collect();
    assert_eq!(labels, ["A", "AIII", "AI", "BDI", "D", "DIII", "AII", "CII", "C", "CI"]);
    let aii = &t.rows[6];
    assert_eq!(aii.entries.iter().map(|g| g.to_string()).collect::<Vec<_>>(), ["Z", "0", "Z/2", "Z/2"]);
}
