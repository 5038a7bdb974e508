//! Derivative-free maximization (Nelder-Mead) used by the profile-likelihood
//! fitter. Deterministic: no randomized restarts.

/// Result of one Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Convergence when the simplex function spread falls below this.
    pub f_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_iter: 2000,
            f_tol: 1e-10,
        }
    }
}

impl NelderMead {
    /// Maximizes `f` from `x0`, building the initial simplex by stepping
    /// each coordinate by the matching entry of `steps`.
    pub fn maximize<F: FnMut(&[f64]) -> f64>(
        &self,
        mut f: F,
        x0: &[f64],
        steps: &[f64],
    ) -> NmResult {
        assert_eq!(x0.len(), steps.len());
        let n = x0.len();
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += steps[i];
            simplex.push(x);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            iterations += 1;
            // Sort descending: best first (maximization).
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            if values[0].is_finite()
                && values[n].is_finite()
                && (values[0] - values[n]).abs() <= self.f_tol * (1.0 + values[0].abs())
            {
                converged = true;
                break;
            }

            // Centroid of all but the worst.
            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64)
                .collect();
            let worst = simplex[n].clone();
            let reflect: Vec<f64> = (0..n).map(|j| 2.0 * centroid[j] - worst[j]).collect();
            let f_reflect = f(&reflect);

            if f_reflect > values[0] {
                let expand: Vec<f64> = (0..n).map(|j| 3.0 * centroid[j] - 2.0 * worst[j]).collect();
                let f_expand = f(&expand);
                if f_expand > f_reflect {
                    simplex[n] = expand;
                    values[n] = f_expand;
                } else {
                    simplex[n] = reflect;
                    values[n] = f_reflect;
                }
            } else if f_reflect > values[n - 1] {
                simplex[n] = reflect;
                values[n] = f_reflect;
            } else {
                let contract: Vec<f64> =
                    (0..n).map(|j| 0.5 * (centroid[j] + worst[j])).collect();
                let f_contract = f(&contract);
                if f_contract > values[n] {
                    simplex[n] = contract;
                    values[n] = f_contract;
                } else {
                    // Shrink toward the best vertex.
                    let (best, rest) = simplex.split_first_mut().expect("simplex is nonempty");
                    for (i, vertex) in rest.iter_mut().enumerate() {
                        for (x, b) in vertex.iter_mut().zip(best.iter()) {
                            *x = 0.5 * (*b + *x);
                        }
                        values[i + 1] = f(vertex);
                    }
                }
            }
        }

        let best = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        NmResult {
            x: simplex[best].clone(),
            value: values[best],
            iterations,
            converged,
        }
    }
}
