//! Dataset loading, standardization, fold splitting, windowing of price
//! series, and synthetic price regimes.

mod folds;
mod scaler;
mod series;
mod tabular;

pub use folds::{split_folds, test_size, Fold};
pub use scaler::Scaler;
pub use series::{
    chronological_split, synthetic_series, window_series, SeriesKind, WindowedSeries, BASE_VOL, DRIFT,
    HIGH_VOL, REGIME_SWITCH, SHOCK_FACTOR,
};
pub use tabular::{known_dataset, load_column, load_csv, TabularDataset, KNOWN_DATASETS};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;
    use crate::error::Error;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn fixture_round_trip() {
        let f = write("a,b,t\n1,2,3\n4,5.5,6\n-7,8,9e-1\n");
        let d = load_csv(f.path(), "t").unwrap();
        assert_eq!(d.x, Tensor::matrix(3, 2, vec![1.0, 2.0, 4.0, 5.5, -7.0, 8.0]).unwrap());
        assert_eq!(d.y.data(), &[3.0, 6.0, 0.9]);
        assert_eq!(d.feature_names, ["a", "b"]);
    }

    #[test]
    fn bad_cell_cites_row() {
        let mut s = String::from("a,t\n");
        for r in 1..=9 {
            s.push_str(&if r == 7 { "x,1\n".to_string() } else { format!("{r},1\n") });
        }
        let f = write(&s);
        match load_csv(f.path(), "t") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn load_errors() {
        assert!(matches!(load_csv("/nonexistent/x.csv", "t"), Err(Error::DatasetMissing(_))));
        let f = write("a,b\n1,2\n");
        assert!(load_csv(f.path(), "t").unwrap_err().to_string().contains("target column"));
    }

    #[test]
    fn constant_columns_dropped() {
        let f = write("a,c,t\n1,5,0\n2,5,1\n3,5,0\n");
        let d = load_csv(f.path(), "t").unwrap();
        assert_eq!(d.feature_names, ["a"]);
    }

    #[test]
    fn scaler_round_trip() {
        let x = Tensor::matrix(3, 2, vec![1.0, 100.0, 2.0, 300.0, 4.0, -50.0]).unwrap();
        let y = Tensor::column(vec![0.5, 1.5, 10.0]).unwrap();
        let s = Scaler::fit(&x, &y);
        let zx = s.transform_x(&x).unwrap();
        let col0: f64 = (0..3).map(|i| zx.get(i, 0)).sum();
        assert!(col0.abs() < 1e-12);
        for (a, b) in s.inverse_x(&zx).unwrap().data().iter().zip(x.data()) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in s.inverse_y(&s.transform_y(&y).unwrap()).unwrap().data().iter().zip(y.data()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(s.transform_x(&y).is_err());
    }

    #[test]
    fn folds_count_and_disjoint() {
        let folds = split_folds(10, 3, 0.2, 1).unwrap();
        for f in &folds {
            assert_eq!((f.test.len(), f.train.len()), (2, 8));
            let mut all: Vec<usize> = f.train.iter().chain(&f.test).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..10).collect::<Vec<_>>());
        }
        assert_eq!(folds, split_folds(10, 3, 0.2, 1).unwrap());
        assert!(split_folds(10, 1, 1.0, 0).is_err());
    }

    #[test]
    fn windows_index_correctly() {
        let p: Vec<f64> = (1..=65).map(f64::from).collect();
        let w = window_series(&p, 60).unwrap();
        assert_eq!(w.len(), 5);
        assert_eq!(w.y.data()[0], 61.0);
        assert_eq!(window_series(&p[..61], 60).unwrap().len(), 1);
        assert!(window_series(&p[..60], 60).is_err());
    }

    #[test]
    fn synthetic_shock_drop() {
        let n = 1000;
        let p = synthetic_series(SeriesKind::Shock, n, 3).unwrap();
        let k = 700;
        let ratio = p[k] / p[k - 1];
        assert!((ratio - SHOCK_FACTOR).abs() < 0.65 * 0.05, "{ratio}");
        assert!(synthetic_series(SeriesKind::Trend, 100, 0).is_err());
    }
}
