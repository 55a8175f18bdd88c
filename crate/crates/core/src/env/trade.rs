/// Reconciles independently requested inter-MG trades.
///
/// `desired[i][j]` is what MG `i` wants from MG `j` (positive = buy). A pair
/// trades only when one side buys what the other sells; the cleared volume is
/// the smaller request. The result is antisymmetric with a zero diagonal.
pub fn clear_trades(desired: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = desired.len();
    let mut realized = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (desired[i][j], desired[j][i]);
            if a * b < 0.0 {
                let v = a.signum() * a.abs().min(b.abs());
                realized[i][j] = v;
                realized[j][i] = -v;
            }
        }
    }
    realized
}
