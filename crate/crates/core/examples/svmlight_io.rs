//! Reading and writing svmlight files, for both classification and
//! qid-grouped ranking data.
//!
//!     cargo run --example svmlight_io

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safe_explore::data_io::{parse_ltr_svmlight, parse_svmlight, subsample, write_svmlight};

const CLASSIFICATION: &str = "\
3 1:0.5 4:1.0
-1 2:0.25 # trailing comment
3 1:0.5 4:1.0
10 3:2\r
";

const RANKING: &str = "\
2 qid:7 1:0.1 2:0.9
0 qid:7 1:0.8 2:0.1
4 qid:9 1:0.3 3:1.5
";

fn main() -> safe_explore::Result<()> {
    let data = parse_svmlight(CLASSIFICATION.as_bytes())?;
    println!("{:?}", data.meta);
    println!("labels in id order: {:?}", data.label_names);
    let instances = data.instances(data.meta.n_features)?;
    for inst in &instances {
        // the first and third rows are identical and share a dedup key
        println!(
            "label {} key {:?} x = {:?}",
            inst.label,
            inst.features.dedup_key(),
            inst.features.values()
        );
    }
    let mut out = Vec::new();
    write_svmlight(&instances, &data.label_names, &mut out)?;
    print!("{}", String::from_utf8_lossy(&out));

    let (queries, meta) = parse_ltr_svmlight(RANKING.as_bytes())?;
    println!("{meta:?}");
    for q in &queries {
        let grades: Vec<u8> = q.docs.iter().map(|(g, _)| *g).collect();
        println!("qid {} grades {grades:?}", q.qid);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let picked = subsample(&queries, 0.5, &mut rng)?;
    println!(
        "half of the queries: {:?}",
        picked.iter().map(|q| &q.qid).collect::<Vec<_>>()
    );

    match parse_ltr_svmlight("5 qid:1 1:1\n".as_bytes()) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
