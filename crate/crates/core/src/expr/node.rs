use std::collections::HashMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

/// Elementary one-argument functions.
///
/// `Sinhc` is `sinh(x)/x` continued by 1 at the origin. Deformed realizations
/// use it so that `sinh(z x)/z = x sinhc(z x)` stays finite as `z -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
    Sqrt,
    Sinhc,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sinhc => "sinhc",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "tanh" => UnaryOp::Tanh,
            "exp" => UnaryOp::Exp,
            "ln" | "log" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            "sinhc" => UnaryOp::Sinhc,
            _ => return None,
        })
    }

    /// Value and first two derivatives at `x`. Domain violations yield
    /// non-finite entries; callers check.
    pub fn taylor(self, x: f64) -> (f64, f64, f64) {
        match self {
            UnaryOp::Neg => (-x, -1.0, 0.0),
            UnaryOp::Sin => {
                let (s, c) = x.sin_cos();
                (s, c, -s)
            }
            UnaryOp::Cos => {
                let (s, c) = x.sin_cos();
                (c, -s, -c)
            }
            UnaryOp::Sinh => (x.sinh(), x.cosh(), x.sinh()),
            UnaryOp::Cosh => (x.cosh(), x.sinh(), x.cosh()),
            UnaryOp::Tanh => {
                let t = x.tanh();
                let d = 1.0 - t * t;
                (t, d, -2.0 * t * d)
            }
            UnaryOp::Exp => {
                let e = x.exp();
                (e, e, e)
            }
            UnaryOp::Ln => {
                if x <= 0.0 {
                    (f64::NAN, f64::NAN, f64::NAN)
                } else {
                    (x.ln(), 1.0 / x, -1.0 / (x * x))
                }
            }
            UnaryOp::Sqrt => {
                if x < 0.0 {
                    (f64::NAN, f64::NAN, f64::NAN)
                } else {
                    let s = x.sqrt();
                    (s, 0.5 / s, -0.25 / (s * x))
                }
            }
            UnaryOp::Sinhc => sinhc_taylor(x),
        }
    }
}

/// sinh(x)/x and its first two derivatives, by series near the origin.
fn sinhc_taylor(x: f64) -> (f64, f64, f64) {
    if x.abs() < 0.5 {
        // f = sum_k c_k x^(2k) with c_k = 1/(2k+1)!
        let x2 = x * x;
        let (mut f, mut d1, mut d2) = (1.0, 0.0, 0.0);
        let mut c = 1.0;
        let mut lower = 1.0; // x^(2k-2)
        for k in 1..12 {
            let n = 2.0 * k as f64;
            c /= n * (n + 1.0);
            f += c * lower * x2;
            d1 += c * n * lower * x;
            d2 += c * n * (n - 1.0) * lower;
            lower *= x2;
        }
        (f, d1, d2)
    } else {
        let (sh, ch) = (x.sinh(), x.cosh());
        let f = sh / x;
        let d1 = (ch - f) / x;
        let d2 = (sh - 2.0 * d1) / x;
        (f, d1, d2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }

    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
            BinaryOp::Pow => pow_value(a, b),
        }
    }
}

/// Real power with the library's domain rule: integer exponents accept any
/// base, other exponents need a positive base.
pub(crate) fn pow_value(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
        a.powi(b as i32)
    } else if a > 0.0 {
        a.powf(b)
    } else {
        f64::NAN
    }
}

/// A named parameter, optionally indexed by site (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamRef {
    pub name: Arc<str>,
    pub index: Option<usize>,
}

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(f64),
    /// Position coordinate q_i (0-based).
    Q(usize),
    /// Momentum coordinate p_i (0-based).
    P(usize),
    Param(ParamRef),
    /// Formal placeholder, bound later by substitution.
    Symbol(Arc<str>),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
}

/// Immutable, structurally shared term graph over phase-space coordinates.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn ptr(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    fn raw(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn constant(v: f64) -> Expr {
        Expr::raw(Node::Const(v))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn q(i: usize) -> Expr {
        Expr::raw(Node::Q(i))
    }

    pub fn p(i: usize) -> Expr {
        Expr::raw(Node::P(i))
    }

    /// A scalar (unindexed) parameter such as `z` or `omega`.
    pub fn param(name: &str) -> Expr {
        Expr::raw(Node::Param(ParamRef { name: name.into(), index: None }))
    }

    /// A per-site parameter such as `b[i]`.
    pub fn site_param(name: &str, index: usize) -> Expr {
        Expr::raw(Node::Param(ParamRef { name: name.into(), index: Some(index) }))
    }

    pub fn symbol(name: &str) -> Expr {
        Expr::raw(Node::Symbol(name.into()))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(v)
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        if let Some(v) = a.as_const() {
            let r = op.taylor(v).0;
            if r.is_finite() {
                return Expr::constant(r);
            }
        }
        Expr::raw(Node::Unary(op, a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            let r = op.apply(x, y);
            if r.is_finite() {
                return Expr::constant(r);
            }
        }
        match op {
            BinaryOp::Add if a.is_const(0.0) => return b,
            BinaryOp::Add | BinaryOp::Sub if b.is_const(0.0) => return a,
            BinaryOp::Sub if a.is_const(0.0) => return Expr::unary(UnaryOp::Neg, b),
            BinaryOp::Mul if a.is_const(0.0) || b.is_const(0.0) => return Expr::zero(),
            BinaryOp::Mul if a.is_const(1.0) => return b,
            BinaryOp::Mul | BinaryOp::Div if b.is_const(1.0) => return a,
            BinaryOp::Pow if b.is_const(1.0) => return a,
            _ => {}
        }
        Expr::raw(Node::Binary(op, a, b))
    }

    pub fn pow(&self, e: impl Into<Expr>) -> Expr {
        Expr::binary(BinaryOp::Pow, self.clone(), e.into())
    }

    pub fn powi(&self, n: i32) -> Expr {
        self.pow(Expr::constant(n as f64))
    }

    pub fn square(&self) -> Expr {
        self.powi(2)
    }

    pub fn recip(&self) -> Expr {
        Expr::one() / self
    }

    pub fn sin(&self) -> Expr {
        Expr::unary(UnaryOp::Sin, self.clone())
    }
    pub fn cos(&self) -> Expr {
        Expr::unary(UnaryOp::Cos, self.clone())
    }
    pub fn sinh(&self) -> Expr {
        Expr::unary(UnaryOp::Sinh, self.clone())
    }
    pub fn cosh(&self) -> Expr {
        Expr::unary(UnaryOp::Cosh, self.clone())
    }
    pub fn tanh(&self) -> Expr {
        Expr::unary(UnaryOp::Tanh, self.clone())
    }
    pub fn exp(&self) -> Expr {
        Expr::unary(UnaryOp::Exp, self.clone())
    }
    pub fn ln(&self) -> Expr {
        Expr::unary(UnaryOp::Ln, self.clone())
    }
    pub fn sqrt(&self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self.clone())
    }
    pub fn sinhc(&self) -> Expr {
        Expr::unary(UnaryOp::Sinhc, self.clone())
    }

    /// Sum of an iterator of expressions (0 when empty).
    pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::zero(), |acc, e| acc + e)
    }

    /// Product of an iterator of expressions (1 when empty).
    pub fn product<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
        items.into_iter().fold(Expr::one(), |acc, e| acc * e)
    }

    /// Rebuild the graph bottom-up, letting `leaf` replace leaves. Shared
    /// subgraphs are rewritten once.
    pub fn map_leaves(&self, leaf: &mut dyn FnMut(&Node) -> Option<Expr>) -> Expr {
        let mut memo: HashMap<*const Node, Expr> = HashMap::new();
        self.map_rec(leaf, &mut memo)
    }

    fn map_rec(
        &self,
        leaf: &mut dyn FnMut(&Node) -> Option<Expr>,
        memo: &mut HashMap<*const Node, Expr>,
    ) -> Expr {
        if let Some(done) = memo.get(&self.ptr()) {
            return done.clone();
        }
        let out = match self.node() {
            Node::Unary(op, a) => {
                let na = a.map_rec(leaf, memo);
                if na.ptr() == a.ptr() {
                    self.clone()
                } else {
                    Expr::unary(*op, na)
                }
            }
            Node::Binary(op, a, b) => {
                let na = a.map_rec(leaf, memo);
                let nb = b.map_rec(leaf, memo);
                if na.ptr() == a.ptr() && nb.ptr() == b.ptr() {
                    self.clone()
                } else {
                    Expr::binary(*op, na, nb)
                }
            }
            other => leaf(other).unwrap_or_else(|| self.clone()),
        };
        memo.insert(self.ptr(), out.clone());
        out
    }

    /// Replace placeholders by expressions; unbound placeholders stay.
    pub fn substitute(&self, bindings: &HashMap<String, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        self.map_leaves(&mut |n| match n {
            Node::Symbol(s) => bindings.get(s.as_ref()).cloned(),
            _ => None,
        })
    }

    /// Move a one-site template (coordinates and site parameters at index 0)
    /// to site `site`.
    pub fn at_site(&self, site: usize) -> Expr {
        if site == 0 {
            return self.clone();
        }
        self.shift_sites(site)
    }

    /// Shift every coordinate and site-parameter index by `by`.
    pub fn shift_sites(&self, by: usize) -> Expr {
        self.map_leaves(&mut |n| match n {
            Node::Q(i) => Some(Expr::q(i + by)),
            Node::P(i) => Some(Expr::p(i + by)),
            Node::Param(ParamRef { name, index: Some(i) }) => Some(Expr::site_param(name, i + by)),
            _ => None,
        })
    }

    /// Visit every distinct node once.
    pub fn visit(&self, f: &mut dyn FnMut(&Node)) {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr()) {
                continue;
            }
            f(e.node());
            match e.node() {
                Node::Unary(_, a) => stack.push(a.clone()),
                Node::Binary(_, a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                _ => {}
            }
        }
    }

    /// Placeholder names still present.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        self.visit(&mut |n| {
            if let Node::Symbol(s) = n {
                out.insert(s.to_string());
            }
        });
        out.into_iter().collect()
    }

    /// Sites whose coordinates appear in the expression, sorted.
    pub fn coordinate_sites(&self) -> Vec<usize> {
        let mut out = std::collections::BTreeSet::new();
        self.visit(&mut |n| match n {
            Node::Q(i) | Node::P(i) => {
                out.insert(*i);
            }
            _ => {}
        });
        out.into_iter().collect()
    }

    /// Symbolic derivative with respect to the placeholder `symbol`.
    ///
    /// Used for user functions of one argument (`F'`, `G'`); coordinates and
    /// parameters count as constants.
    pub fn derivative(&self, symbol: &str) -> Expr {
        let mut memo: HashMap<*const Node, Expr> = HashMap::new();
        self.diff_rec(symbol, &mut memo)
    }

    fn diff_rec(&self, s: &str, memo: &mut HashMap<*const Node, Expr>) -> Expr {
        if let Some(d) = memo.get(&self.ptr()) {
            return d.clone();
        }
        let out = match self.node() {
            Node::Symbol(name) if name.as_ref() == s => Expr::one(),
            Node::Const(_) | Node::Q(_) | Node::P(_) | Node::Param(_) | Node::Symbol(_) => Expr::zero(),
            Node::Unary(op, a) => {
                let da = a.diff_rec(s, memo);
                if da.as_const() == Some(0.0) {
                    Expr::zero()
                } else {
                    let outer = match op {
                        UnaryOp::Neg => Expr::constant(-1.0),
                        UnaryOp::Sin => a.cos(),
                        UnaryOp::Cos => -a.sin(),
                        UnaryOp::Sinh => a.cosh(),
                        UnaryOp::Cosh => a.sinh(),
                        UnaryOp::Tanh => 1.0 - a.tanh().square(),
                        UnaryOp::Exp => a.exp(),
                        UnaryOp::Ln => a.recip(),
                        UnaryOp::Sqrt => 0.5 / a.sqrt(),
                        // (cosh x - sinhc x)/x, singular as an expression at 0
                        UnaryOp::Sinhc => (a.cosh() - a.sinhc()) / a.clone(),
                    };
                    outer * da
                }
            }
            Node::Binary(op, a, b) => {
                let (da, db) = (a.diff_rec(s, memo), b.diff_rec(s, memo));
                match op {
                    BinaryOp::Add => da + db,
                    BinaryOp::Sub => da - db,
                    BinaryOp::Mul => da * b.clone() + a.clone() * db,
                    BinaryOp::Div => (da * b.clone() - a.clone() * db) / b.square(),
                    BinaryOp::Pow => {
                        if db.as_const() == Some(0.0) {
                            b.clone() * a.pow(b.clone() - 1.0) * da
                        } else {
                            self.clone() * (db * a.ln() + b.clone() * da / a.clone())
                        }
                    }
                }
            }
        };
        memo.insert(self.ptr(), out.clone());
        out
    }

    /// Number of distinct nodes.
    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.ptr() == other.ptr() || self.node() == other.node()
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn fmt_number(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

/// Fully parenthesised infix form, readable back by [`crate::expr::parse`].
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(v) => fmt_number(*v, f),
            Node::Q(i) => write!(f, "q{}", i + 1),
            Node::P(i) => write!(f, "p{}", i + 1),
            Node::Param(ParamRef { name, index: None }) => write!(f, "{name}"),
            Node::Param(ParamRef { name, index: Some(i) }) => write!(f, "{name}[{}]", i + 1),
            Node::Symbol(s) => write!(f, "{s}"),
            Node::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Node::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::constant(v)
    }
}

impl From<&Expr> for Expr {
    fn from(e: &Expr) -> Self {
        e.clone()
    }
}

macro_rules! bin_ops {
    ($tr:ident, $method:ident, $op:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self, rhs.clone())
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self.clone(), rhs.clone())
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self, Expr::constant(rhs))
            }
        }
        impl ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self.clone(), Expr::constant(rhs))
            }
        }
        impl ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, Expr::constant(self), rhs)
            }
        }
        impl ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, Expr::constant(self), rhs.clone())
            }
        }
    };
}

bin_ops!(Add, add, BinaryOp::Add);
bin_ops!(Sub, sub, BinaryOp::Sub);
bin_ops!(Mul, mul, BinaryOp::Mul);
bin_ops!(Div, div, BinaryOp::Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self.clone())
    }
}
