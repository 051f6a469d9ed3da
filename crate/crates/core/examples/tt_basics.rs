//! TT tensors: construction, compression, per-core Fourier transform and
//! the TTv1 file format.

use crossconv::dense::DenseTensor;
use crossconv::dft::Direction;
use crossconv::tt::io::{tt_read, tt_write};
use crossconv::TTTensor;

fn main() -> crossconv::Result<()> {
    // 1 / (1 + i + j + k) on a 12^3 grid
    let dense = DenseTensor::from_real_fn(vec![12; 3], |i| 1.0 / (1.0 + (i[0] + i[1] + i[2]) as f64))?;
    let t = TTTensor::from_dense(&dense, 1e-10)?;
    println!("ranks {:?}, storage {} of {}", t.ranks(), t.storage(), dense.len());
    println!("tt-svd error {:.2e}", t.to_dense()?.relative_error(&dense)?);

    let rounded = t.round(1e-4)?;
    println!("rounded to 1e-4: ranks {:?}, error {:.2e}", rounded.ranks(), rounded.to_dense()?.relative_error(&dense)?);

    let f = t.dft(Direction::Forward);
    println!("after dft: ranks {:?}", f.ranks());
    let back = f.dft(Direction::Inverse);
    println!("inverse dft error {:.2e}", back.to_dense()?.relative_error(&dense)?);

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("t.tt");
    tt_write(&t, &path)?;
    let again = tt_read(&path)?;
    println!("TTv1 file {} bytes, same ranks: {}", std::fs::metadata(&path)?.len(), again.ranks() == t.ranks());
    Ok(())
}
