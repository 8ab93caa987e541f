//! Build the predefined Karras noise array once and take discretization
//! views of it by index.
//!
//! Run with: cargo run --example karras_array

use cm_sched::schedule::{karras_sigmas, subsample_levels, KarrasParams};

fn main() -> cm_sched::Result<()> {
    let params = KarrasParams::default(); // sigma 0.002..80, rho 7, s1 = 250
    let array = karras_sigmas(&params)?;
    let sigmas = array.sigmas();

    println!("predefined array: {} levels", sigmas.len());
    println!("  sigma[0]   = {}", sigmas[0]);
    println!("  sigma[125] = {}", sigmas[125]);
    println!("  sigma[250] = {}", sigmas[250]);

    // Any discretization count up to s1 selects from the same array; the
    // endpoints are always pinned.
    for n_k in [20, 50, 125, 250] {
        let levels = subsample_levels(&array, n_k)?;
        let idx = levels.indices();
        println!(
            "n_k = {n_k:>3}: indices [{}, {}, {}, ..., {}]",
            idx[0],
            idx[1],
            idx[2],
            idx[n_k]
        );
    }

    // Every selected sigma is bitwise an element of the parent array.
    let levels = subsample_levels(&array, 77)?;
    assert!(levels.sigmas().iter().all(|&s| array.contains_bits(s)));
    println!("closure holds for n_k = 77");
    Ok(())
}
