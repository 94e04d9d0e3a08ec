use metamat_core::geometry::{generate_dataset, volume_fraction, GenConfig};
use metamat_core::gpr::{fit, metrics, FitConfig};
use metamat_core::homogenize::{label_dataset, LabelConfig, Material};
use metamat_core::linalg::Matrix;
use metamat_core::statistics::{
    assemble_features, pca_fit, pca_reconstruct, pca_transform, Combination, LazyFeatures, RowSource, Standardizer,
};

fn small_config() -> GenConfig {
    GenConfig { tile_width: 12, tile_height: 12, correlation_length: 4.0, ..GenConfig::default() }
}

#[test]
fn lazy_and_materialized_features_agree() {
    let cells = generate_dataset(12, 4, &small_config()).unwrap();
    for combination in Combination::ALL {
        let (features, rescale) = assemble_features(&cells, combination, None).unwrap();
        let lazy = LazyFeatures::new(&cells, combination, None).unwrap();
        assert_eq!(lazy.fit_rescale().unwrap(), rescale);
        let scaled = LazyFeatures::new(&cells, combination, Some(rescale)).unwrap();
        assert_eq!((scaled.nrows(), scaled.ncols()), (features.rows(), features.cols()));
        let mut row = vec![0.0; scaled.ncols()];
        for i in 0..cells.len() {
            scaled.read_row(i, &mut row).unwrap();
            assert_eq!(row.as_slice(), features.data.row(i));
        }
        // solid auto-correlation at zero shift is the volume fraction
        for (i, cell) in cells.iter().enumerate() {
            assert_eq!(features.data[(i, 0)], volume_fraction(cell));
        }
    }
}

#[test]
fn small_structure_property_chain() {
    let cells = generate_dataset(40, 11, &small_config()).unwrap();
    let batch = label_dataset(&cells, &Material::default(), &LabelConfig::default()).unwrap();
    assert!(batch.failures.is_empty());
    assert_eq!(batch.kept.len() + batch.dropped.len(), cells.len());
    for l in &batch.labels {
        assert!(l.converged && l.normalized_c11 > -1e-9 && l.normalized_c11 < 1.3461539, "{l:?}");
    }

    let (features, _) = assemble_features(&cells, Combination::SI, None).unwrap();
    let full = pca_fit(&features, cells.len() - 1, 1).unwrap();
    let scores = pca_transform(&full, &features).unwrap();
    let back = pca_reconstruct(&full, &scores).unwrap();
    assert!(back.max_abs_diff(&features.data) < 1e-8);

    let model = pca_fit(&features, 4, 1).unwrap();
    let scores = pca_transform(&model, &features).unwrap();
    let rows: Vec<usize> = batch.kept.clone();
    let y: Vec<f64> = rows.iter().map(|&i| batch.labels[i].normalized_c11).collect();
    let x_raw: Matrix = scores.select_rows(&rows);
    let x = Standardizer::fit(&x_raw).unwrap().apply(&x_raw).unwrap();
    let (gp, report) = fit(&x, &y, &FitConfig { restarts: 2, iterations: 150, ..FitConfig::default() }).unwrap();
    assert!(report.nlml.is_finite());
    let (mean, var) = gp.predict(&x).unwrap();
    assert!(var.iter().all(|&v| v > 0.0));
    // in-sample fit beats the constant predictor
    let m = metrics(&y, &mean).unwrap();
    assert!(m.r2 > 0.0, "in-sample R² {}", m.r2);
}
