//! The fuzzy data graph `P`: exact k-NN, per-point local scales `(rho, sigma)`,
//! directional memberships and their probabilistic-OR symmetrization.

pub mod io;
mod fuzzy;
mod knn;
mod scale;

pub use fuzzy::{build_graph, directional_table, fuzzy_union, symmetrize, DataGraph, Edge};
pub use knn::{knn, Metric, NeighborTable};
pub use scale::{
    directional_probability, fit_local_scale, membership_sum, sigma_bounds, LocalScale, BISECTION_ITERS,
    BISECTION_TOL, SIGMA_MAX, SIGMA_MIN_FRACTION,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;
    use crate::exec::Exec;
    use std::path::Path;

    fn line(points: &[f64]) -> Tensor {
        Tensor::matrix(points.len(), 1, points.to_vec()).unwrap()
    }

    #[test]
    fn collinear_knn() {
        let t = knn(&line(&[0.0, 1.0, 3.0, 10.0]), 2, Metric::Euclidean, Exec::Sequential).unwrap();
        assert_eq!(t.indices, vec![vec![1, 2], vec![0, 2], vec![1, 0], vec![2, 1]]);
        assert_eq!(t.distances[2], vec![2.0, 3.0]);
    }

    #[test]
    fn k_too_large() {
        let err = knn(&line(&[0.0, 1.0, 2.0]), 3, Metric::Euclidean, Exec::Sequential).unwrap_err();
        assert!(err.to_string().contains("K must be < N"));
        assert!(err.is_usage());
    }

    #[test]
    fn duplicates_list_each_other_first() {
        let t = knn(&line(&[5.0, 0.0, 5.0, 9.0]), 2, Metric::Euclidean, Exec::Sequential).unwrap();
        assert_eq!((t.indices[0][0], t.distances[0][0]), (2, 0.0));
        assert_eq!((t.indices[2][0], t.distances[2][0]), (0, 0.0));
    }

    #[test]
    fn membership_examples() {
        assert_eq!(directional_probability(2.0, 2.0, 0.7), 1.0);
        assert!((directional_probability(2.7, 2.0, 0.7) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(directional_probability(1.0, 2.0, 0.7), 1.0);
        assert_eq!(fuzzy_union(1.0, 0.0), 1.0);
        assert_eq!(fuzzy_union(0.5, 0.5), 0.75);
        assert_eq!(fuzzy_union(1.0, 0.3), 1.0);
    }

    #[test]
    fn scale_clamps() {
        let s = fit_local_scale(&[2.0, 2.0, 2.0], 3).unwrap();
        assert_eq!(s.sigma, sigma_bounds(&[2.0, 2.0, 2.0]).0);
        let s = fit_local_scale(&[1.0, 2.0], 2).unwrap();
        assert_eq!((s.rho, s.sigma), (1.0, 1.5e-3));
        let s = fit_local_scale(&[0.0, 0.0], 2).unwrap();
        assert_eq!(s.sigma, SIGMA_MIN_FRACTION);
    }

    #[test]
    fn symmetrize_drops_zero_and_merges() {
        let dir = vec![vec![(1, 1.0), (2, 0.0)], vec![(0, 0.5), (2, 0.5)], vec![(1, 0.5)]];
        let e = symmetrize(&dir);
        assert_eq!(e, vec![Edge { i: 0, j: 1, p: 1.0 }, Edge { i: 1, j: 2, p: 0.75 }]);
    }

    #[test]
    fn export_round_trip() {
        let x = Tensor::matrix(6, 2, vec![0.0, 0.1, 1.0, 0.3, 0.2, 2.0, 3.0, 1.0, 0.5, 0.5, 2.2, 0.9]).unwrap();
        let g = build_graph(&x, 3, Metric::Euclidean, Exec::Sequential).unwrap();
        let text = io::to_text(&g);
        let back = io::from_text(&text, Path::new("g")).unwrap();
        assert_eq!(back, g);
        assert_eq!(io::to_text(&back), text);
    }
}
