use super::{matrix_exponential, solve_real, SampleTime, StateSpaceModel};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, RowDVector};

fn check_continuous(model: &StateSpaceModel, ts: f64) -> Result<()> {
    if !model.is_continuous() {
        return Err(Error::InvalidArgument("model is already discrete".into()));
    }
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sample time must be positive, got {ts}"
        )));
    }
    Ok(())
}

/// Bilinear (Tustin) discretization, s = (2/Ts)(z-1)/(z+1).
///
/// With M = (I - A Ts/2)^-1:
/// Ad = M (I + A Ts/2), Bd = M B Ts, Cd = C M, Dd = D + C M B Ts/2.
pub fn tustin_discretize(model: &StateSpaceModel, ts: f64) -> Result<StateSpaceModel> {
    check_continuous(model, ts)?;
    let n = model.order();
    if n == 0 {
        return StateSpaceModel::with_sample_time(
            DMatrix::zeros(0, 0),
            DVector::zeros(0),
            RowDVector::zeros(0),
            model.d(),
            SampleTime::Discrete(ts),
        );
    }
    let ident = DMatrix::<f64>::identity(n, n);
    let half = model.a() * (ts / 2.0);
    let m = solve_real(&ident - &half, &ident).ok_or(Error::Singular("I - A Ts/2"))?;
    let ad = &m * (&ident + &half);
    let mb = &m * model.b();
    let bd = &mb * ts;
    let cd = model.c() * &m;
    let dd = model.d() + (model.c() * &mb)[0] * ts / 2.0;
    StateSpaceModel::with_sample_time(ad, bd, cd, dd, SampleTime::Discrete(ts))
}

/// Zero-order-hold discretization, exact for piecewise-constant inputs.
pub fn zoh_discretize(model: &StateSpaceModel, ts: f64) -> Result<StateSpaceModel> {
    check_continuous(model, ts)?;
    let n = model.order();
    // exp([[A, B], [0, 0]] Ts) = [[Ad, Bd], [0, 1]]
    let mut aug = DMatrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(model.a());
    aug.view_mut((0, n), (n, 1)).copy_from(model.b());
    let e = matrix_exponential(&(aug * ts))?;
    let ad = e.view((0, 0), (n, n)).into_owned();
    let bd = DVector::from_iterator(n, e.view((0, n), (n, 1)).iter().copied());
    StateSpaceModel::with_sample_time(ad, bd, model.c().clone(), model.d(), SampleTime::Discrete(ts))
}
