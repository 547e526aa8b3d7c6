fn main() {
    use localbenford::fixed::FixedReal;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    let w = 224u32;
    let coeffs = [BigInt::from(-1), BigInt::from(-1), BigInt::from(1)];
    let deriv = [BigInt::from(-1), BigInt::from(2)];
    let eval = |cs: &[BigInt], x: &FixedReal| {
        let mut acc = FixedReal::zero();
        for c in cs.iter().rev() {
            acc = acc.mul(x).add(&FixedReal::from_int(c.clone()));
        }
        acc
    };
    let r = BigRational::from_float(1.618033988749895f64).unwrap();
    let mut x = FixedReal::from_ratio(&r, w);
    for it in 0..60 {
        let f = eval(&coeffs, &x);
        let fp = eval(&deriv, &x);
        if f.mantissa().sign() == num_bigint::Sign::NoSign { println!("zero mantissa at {it}"); break; }
        let step = match f.div(&fp) {
            Ok(s) => s,
            Err(e) => { println!("iter {it}: DIV ERR {e}; f err={} fp err={} x err={}", f.err(), fp.err(), x.err()); break; }
        };
        x = x.sub(&step).rescale(w);
        println!("iter {it}: step_mag={:.1} x_err={} f_mantissa_bits={}", step.mag_log2_upper(), x.err(), f.mantissa().bits());
        if step.mag_log2_upper() < -(w as f64 - 2.0) { println!("break"); break; }
    }
}
