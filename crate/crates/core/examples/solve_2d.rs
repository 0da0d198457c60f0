use laxmilgram::laxmilgram::{solve, SolveOptions, VariationalProblem};
use laxmilgram::operators::{BilinearForm, LinearForm};
use laxmilgram::space::HilbertSpace;

fn main() -> laxmilgram::Result<()> {
    let space = HilbertSpace::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]])?;
    let a = BilinearForm::from_rows(&[vec![3.0, 1.0], vec![-1.0, 2.0]])?;
    let f = LinearForm::from_vec(vec![1.0, 2.0]);
    let problem = VariationalProblem::new(space, a, f)?;
    let report = solve(&problem, &SolveOptions::tol(1e-12))?;
    assert!(report.estimate_holds(1e-10));
    println!("u = {:?} after {} iterations", report.solution.as_slice(), report.iterations);
    Ok(())
}
