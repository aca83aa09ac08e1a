use std::hint::black_box;

use ats_core::synth::{generate_synthetic, LearnerProfile, LessonPlan};
use ats_core::CourseModel;
use ats_core::{
    aggregate, analyze_clip, classify_emotion, select_feedback, AffectPoint, ClipObservation,
    CognitiveStyle, Engine, FeedbackCatalog, StateCounts, ThresholdConfig,
};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

fn lesson_clips(profile: LearnerProfile, learner: &str) -> Vec<ClipObservation> {
    let plan = LessonPlan {
        lesson_id: "s1-w1".into(),
        duration_secs: 300,
        starts_at: chrono::DateTime::from_timestamp(1_700_000_000, 0).unwrap(),
    };
    generate_synthetic(learner, &profile, &plan).unwrap()
}

fn classify(c: &mut Criterion) {
    let cfg = ThresholdConfig::default();
    let points: Vec<AffectPoint> = (-10..=10)
        .flat_map(|v| (-10..=10).map(move |a| AffectPoint::new(f64::from(v), f64::from(a))))
        .collect();
    let mut g = c.benchmark_group("classify_emotion");
    g.throughput(Throughput::Elements(points.len() as u64));
    g.bench_function("grid_441", |b| {
        b.iter(|| {
            for p in &points {
                black_box(classify_emotion(*p, &cfg).unwrap());
            }
        })
    });
    g.finish();
}

fn clips(c: &mut Criterion) {
    let cfg = ThresholdConfig::default();
    let clip = lesson_clips(LearnerProfile::confused(CognitiveStyle::Wholistic, 3), "b")[0].clone();
    let mut g = c.benchmark_group("analyze_clip");
    g.throughput(Throughput::Elements(1));
    g.bench_function("150_frames", |b| {
        b.iter(|| black_box(analyze_clip(&clip, &cfg).unwrap()))
    });
    g.finish();
}

fn aggregation(c: &mut Criterion) {
    let cfg = ThresholdConfig::default();
    let counts: Vec<StateCounts> = (0..64u32)
        .map(|i| StateCounts::from_array([i % 5, i % 3, i % 4, i % 6, i % 7, i % 2, i % 3, i % 5]))
        .collect();
    c.bench_function("aggregate/64_vectors", |b| {
        b.iter(|| {
            for k in &counts {
                black_box(aggregate(k, &cfg));
            }
        })
    });
}

fn pipeline(c: &mut Criterion) {
    let cfg = ThresholdConfig::default();
    let catalog = FeedbackCatalog::default();
    let clips = lesson_clips(
        LearnerProfile::distracted(CognitiveStyle::Wholistic, 5),
        "b",
    );
    let mut g = c.benchmark_group("lesson_pipeline");
    g.throughput(Throughput::Elements(clips.len() as u64));
    g.bench_function("analyze_aggregate_feedback", |b| {
        b.iter(|| {
            let counts: StateCounts = clips
                .iter()
                .map(|c| analyze_clip(c, &cfg).unwrap().state)
                .collect();
            black_box(select_feedback(aggregate(&counts, &cfg), true, &catalog))
        })
    });
    g.bench_function("engine_ingest_and_complete", |b| {
        b.iter_batched(
            || {
                let e = Engine::in_memory();
                e.define_course(CourseModel::canonical()).unwrap();
                e.enroll("b", "ai-for-everyone", CognitiveStyle::Wholistic)
                    .unwrap();
                e
            },
            |e| {
                for clip in &clips {
                    e.ingest_clip(clip).unwrap();
                }
                black_box(e.complete_lesson("b", "s1-w1").unwrap())
            },
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, classify, clips, aggregation, pipeline);
criterion_main!(benches);
