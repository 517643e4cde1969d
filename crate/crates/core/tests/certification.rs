use adds_core::certify::{certify, smoothed_predict, Prediction, SmoothedClassifier};
use adds_core::data::{make_gmm_task, BayesClassifier};
use adds_core::denoise::GmmDenoiser;
use adds_core::exec::Parallelism;
use adds_core::rng::StreamKey;
use adds_core::sampler::{Method, Pipeline, PipelineConfig};
use adds_core::schedule::NoiseSchedule;

fn setup() -> (BayesClassifier, GmmDenoiser, NoiseSchedule) {
    let gmm = make_gmm_task(3, 2, 4.0, 0.5, 11).unwrap();
    (
        BayesClassifier::new(gmm.clone()),
        GmmDenoiser::new(gmm),
        NoiseSchedule::reference(),
    )
}

#[test]
fn every_method_certifies_a_central_point() {
    let (clf, den, base) = setup();
    let centre = clf.model().means()[0].clone();
    let label = clf.model().labels()[0];
    for method in Method::ALL {
        let votes = if method.uses_votes() { 3 } else { 1 };
        let p = Pipeline::new(
            PipelineConfig::new(method, 0.5).with_votes(votes),
            &base,
            &den,
        )
        .unwrap();
        let model = SmoothedClassifier::new(&p, &clf);
        let res = certify(&model, &centre, 20, 200, 0.001, StreamKey::new(5)).unwrap();
        assert_eq!(res.prediction, Prediction::Label(label), "{method}");
        assert!(res.radius > 0.0, "{method}");
        let pred = smoothed_predict(&model, &centre, 100, 0.001, StreamKey::new(6)).unwrap();
        assert_eq!(pred.prediction, Prediction::Label(label), "{method}");
    }
}

#[test]
fn backends_produce_identical_certificates() {
    let (clf, den, base) = setup();
    let p = Pipeline::new(
        PipelineConfig::new(Method::Adds, 1.0).with_votes(3),
        &base,
        &den,
    )
    .unwrap();
    let x = [0.3, -0.8];
    let seq = SmoothedClassifier::new(&p, &clf).with_parallelism(Parallelism::Sequential);
    let par = SmoothedClassifier::new(&p, &clf).with_parallelism(Parallelism::Rayon);
    let a = certify(&seq, &x, 10, 100, 0.01, StreamKey::new(9)).unwrap();
    let b = certify(&par, &x, 10, 100, 0.01, StreamKey::new(9)).unwrap();
    assert_eq!(a.hits, b.hits);
    assert_eq!(a.radius.to_bits(), b.radius.to_bits());
}
