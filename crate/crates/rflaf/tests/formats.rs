use std::fs;

use rflaf::config::{ExperimentConfig, Mode};
use rflaf::experiments;
use rflaf::format::{export_csv, load_checkpoint, load_dataset, save_checkpoint, save_dataset};
use rflaf::table::Table;
use rflaf::Error;
use rflaf_core::basis::build_grid;
use rflaf_core::data::{gen_dataset, Sigma, TargetSpec};
use rflaf_core::model::{FeatureBank, RflafModel};

fn model() -> RflafModel {
    let bank = FeatureBank::sample(3, 12, 8).unwrap();
    RflafModel::init(bank, build_grid(-2.0, 2.0, 20, 0.4).unwrap(), 9).unwrap()
}

#[test]
fn checkpoint_file_round_trip_preserves_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    let m = model();
    save_checkpoint(&m, &path).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back, m);
    for x in [[0.1, 0.2, -0.3], [3.0, -1.0, 0.5]] {
        assert_eq!(back.forward(&x).unwrap(), m.forward(&x).unwrap());
    }
}

#[test]
fn corrupt_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.ckpt");
    fs::write(&path, b"not a checkpoint").unwrap();
    assert!(matches!(load_checkpoint(&path), Err(Error::Format(_))));
    assert!(matches!(load_dataset(&path), Err(Error::Format(_))));
    assert!(matches!(load_checkpoint(&dir.path().join("missing")), Err(Error::Io { .. })));
}

#[test]
fn dataset_file_and_csv_export() {
    let dir = tempfile::tempdir().unwrap();
    let spec = TargetSpec { mc_samples: 1000, ..TargetSpec::new(Sigma::S2, 2, 1) };
    let ds = gen_dataset(&spec, 50, 2, 0.2, 2).unwrap();
    let bin = dir.path().join("d.rfd");
    save_dataset(&ds, &bin).unwrap();
    assert_eq!(load_dataset(&bin).unwrap(), ds);

    let csv_path = dir.path().join("d.csv");
    export_csv(&ds, &csv_path).unwrap();
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), ["x_1", "x_2", "y", "split"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 50);
    assert_eq!(rows.iter().filter(|r| &r[3] == "test").count(), 10);
}

#[test]
fn export_activation_reads_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("m.ckpt");
    let m = model();
    save_checkpoint(&m, &ckpt).unwrap();
    let mut cfg = ExperimentConfig::new(Mode::ExportActivation);
    cfg.export.checkpoint = Some(ckpt);
    cfg.export.target = None;
    cfg.export.points = 11;
    let out = dir.path().join("out");
    let report = experiments::run(&cfg, &out).unwrap();
    assert!(report.passed());
    let table = Table::parse(&fs::read_to_string(out.join("activation.txt")).unwrap()).unwrap();
    let z = table.column("z").unwrap();
    let learned = table.column("learned").unwrap();
    assert_eq!(z.len(), 11);
    for (z, s) in z.iter().zip(&learned) {
        assert_eq!(*s, m.activation(*z));
    }
}
