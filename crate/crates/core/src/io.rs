//! JSON interchange, generator specs and OBJ export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::construct::{
    complete_L, gen_cone_cylinder, gen_doubled_cone_cylinder, CompletionClass, ConeCylinderData, Direction,
    DoubledSeed, LShapedNet,
};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::net::{Net, Tolerances};
use crate::smooth::SmoothConeCylinderNet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetJson {
    pub dim: usize,
    pub m: usize,
    pub n: usize,
    pub vertices: Vec<Vec<f64>>,
}

fn to_point(v: &[f64], dim: usize, what: &str) -> Result<Point> {
    if v.len() != dim {
        return Err(Error::Input(format!("{what} has {} coordinates, expected {dim}", v.len())));
    }
    Ok(Point::new(v[0], v[1], if dim == 3 { v[2] } else { 0.0 }))
}

fn from_point(p: &Point, dim: usize) -> Vec<f64> {
    p.iter().take(dim).copied().collect()
}

impl From<&Net> for NetJson {
    fn from(net: &Net) -> Self {
        NetJson {
            dim: net.dim(),
            m: net.m(),
            n: net.n(),
            vertices: net.vertices().iter().map(|p| from_point(p, net.dim())).collect(),
        }
    }
}

impl TryFrom<NetJson> for Net {
    type Error = Error;

    fn try_from(j: NetJson) -> Result<Net> {
        if j.dim != 2 && j.dim != 3 {
            return Err(Error::Input(format!("dim must be 2 or 3, got {}", j.dim)));
        }
        let n1 = j.n + 1;
        let pts = j
            .vertices
            .iter()
            .enumerate()
            .map(|(k, v)| to_point(v, j.dim, &format!("vertex ({},{})", k / n1, k % n1)))
            .collect::<Result<Vec<_>>>()?;
        Net::new(j.m, j.n, j.dim, pts)
    }
}

pub fn net_to_json(net: &Net) -> String {
    serde_json::to_string_pretty(&NetJson::from(net)).expect("plain data serializes")
}

pub fn net_from_json(s: &str) -> Result<Net> {
    Net::try_from(serde_json::from_str::<NetJson>(s)?)
}

pub fn read_net(path: &Path) -> Result<Net> {
    net_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_net(path: &Path, net: &Net) -> Result<()> {
    let mut s = net_to_json(net);
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

/// Explicit numeric description of a generated net.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    ConeCylinder {
        a: Vec<Vec<f64>>,
        sigma: Vec<f64>,
        b: Vec<Vec<f64>>,
        #[serde(default)]
        direction: Direction,
    },
    /// L-shaped net completed to the unique deformable net of its class.
    LShape {
        class: CompletionClass,
        /// Keys `"i,j"`.
        points: BTreeMap<String, Vec<f64>>,
    },
    /// Even columns `a_i + sigma_i b_k`; odd columns from `odd_row0` and `kappa`.
    DoubledConeCylinder {
        a: Vec<Vec<f64>>,
        sigma: Vec<f64>,
        b: Vec<Vec<f64>>,
        odd_row0: Vec<Vec<f64>>,
        kappa: Vec<f64>,
        #[serde(default)]
        direction: Direction,
    },
}

fn infer_dim(vs: &[&Vec<f64>]) -> Result<usize> {
    let d = vs.first().map_or(0, |v| v.len());
    if !(d == 2 || d == 3) || vs.iter().any(|v| v.len() != d) {
        return Err(Error::Input("all points must have the same dimension, 2 or 3".into()));
    }
    Ok(d)
}

fn points(vs: &[Vec<f64>], dim: usize, name: &str) -> Result<Vec<Point>> {
    vs.iter().enumerate().map(|(k, v)| to_point(v, dim, &format!("{name}[{k}]"))).collect()
}

fn cone_data(a: &[Vec<f64>], sigma: &[f64], b: &[Vec<f64>], direction: Direction) -> Result<ConeCylinderData> {
    let all: Vec<&Vec<f64>> = a.iter().chain(b).collect();
    let dim = infer_dim(&all)?;
    ConeCylinderData::new(points(a, dim, "a")?, sigma.to_vec(), points(b, dim, "b")?, direction, dim)
}

fn parse_index(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::Input(format!("point key {key:?} is not of the form \"i,j\""));
    let (i, j) = key.split_once(',').ok_or_else(bad)?;
    Ok((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
}

impl GeneratorSpec {
    pub fn l_shape(&self) -> Result<Option<LShapedNet>> {
        let GeneratorSpec::LShape { points, .. } = self else {
            return Ok(None);
        };
        let vals: Vec<&Vec<f64>> = points.values().collect();
        let dim = infer_dim(&vals)?;
        let mut map = BTreeMap::new();
        for (k, v) in points {
            let idx = parse_index(k)?;
            map.insert(idx, to_point(v, dim, &format!("point {k}"))?);
        }
        let m = map.keys().map(|k| k.0).max().unwrap_or(0);
        let n = map.keys().map(|k| k.1).max().unwrap_or(0);
        Ok(Some(LShapedNet::new(m, n, dim, map)?))
    }

    pub fn generate(&self, tol: &Tolerances) -> Result<Net> {
        match self {
            GeneratorSpec::ConeCylinder { a, sigma, b, direction } => {
                gen_cone_cylinder(&cone_data(a, sigma, b, *direction)?, tol)
            }
            GeneratorSpec::LShape { class, .. } => {
                complete_L(&self.l_shape()?.expect("l-shape spec"), *class, tol)
            }
            GeneratorSpec::DoubledConeCylinder { a, sigma, b, odd_row0, kappa, direction } => {
                let even = cone_data(a, sigma, b, *direction)?;
                let odd = points(odd_row0, even.dim, "odd_row0")?;
                gen_doubled_cone_cylinder(&DoubledSeed { even, odd_row0: odd, kappa: kappa.clone() }, tol)
            }
        }
    }
}

pub fn l_shape_to_spec(l: &LShapedNet, class: CompletionClass) -> GeneratorSpec {
    GeneratorSpec::LShape {
        class,
        points: l.points.iter().map(|((i, j), p)| (format!("{i},{j}"), from_point(p, l.dim))).collect(),
    }
}

/// Parses and validates a smooth surface spec.
pub fn smooth_from_json(s: &str) -> Result<SmoothConeCylinderNet> {
    serde_json::from_str::<SmoothConeCylinderNet>(s)?.validated()
}

/// OBJ text: `v` lines in index order, then 1-based quads
/// `P_ij, P_{i,j+1}, P_{i+1,j+1}, P_{i+1,j}`.
pub fn obj_string(net: &Net) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# net {} {}", net.m(), net.n());
    let _ = writeln!(s, "# dim {}", net.dim());
    for p in net.vertices() {
        let _ = writeln!(s, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
    }
    for i in 0..net.m() {
        for j in 0..net.n() {
            let k = |i: usize, j: usize| net.idx(i, j) + 1;
            let _ = writeln!(s, "f {} {} {} {}", k(i, j), k(i, j + 1), k(i + 1, j + 1), k(i + 1, j));
        }
    }
    s
}

pub fn export_obj(net: &Net, path: &Path) -> Result<()> {
    std::fs::write(path, obj_string(net))?;
    Ok(())
}

/// Reads OBJ text written by [`obj_string`].
pub fn obj_from_str(s: &str) -> Result<Net> {
    let mut shape = None;
    let mut dim = 3;
    let mut verts = Vec::new();
    for (ln, line) in s.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("#") => match it.next() {
                Some("net") => {
                    let m: usize = it.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad_obj(ln))?;
                    let n: usize = it.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad_obj(ln))?;
                    shape = Some((m, n));
                }
                Some("dim") => dim = it.next().and_then(|x| x.parse().ok()).ok_or_else(|| bad_obj(ln))?,
                _ => {}
            },
            Some("v") => {
                let c: Vec<f64> = it.map(|x| x.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad_obj(ln))?;
                if c.len() != 3 {
                    return Err(bad_obj(ln));
                }
                verts.push(Point::new(c[0], c[1], c[2]));
            }
            _ => {}
        }
    }
    let (m, n) = shape.ok_or_else(|| Error::Input("OBJ lacks the '# net m n' header".into()))?;
    Net::new(m, n, dim, verts)
}

fn bad_obj(line: usize) -> Error {
    Error::Input(format!("malformed OBJ line {}", line + 1))
}

pub fn import_obj(path: &Path) -> Result<Net> {
    obj_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obj_square() {
        let s = obj_string(&Net::square_grid(1, 1));
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(s.lines().filter(|l| l.starts_with("f ")).collect::<Vec<_>>(), vec!["f 1 2 4 3"]);
        let g = obj_string(&Net::square_grid(2, 2));
        assert_eq!(g.lines().filter(|l| l.starts_with("v ")).count(), 9);
        assert_eq!(g.lines().filter(|l| l.starts_with("f ")).count(), 4);
    }

    #[test]
    fn json_rejects_wrong_arity() {
        let s = r#"{"dim":2,"m":1,"n":1,"vertices":[[0,0],[1,0],[0,1],[1,1,0]]}"#;
        assert!(net_from_json(s).unwrap_err().to_string().contains("(1,1)"));
    }

    #[test]
    fn l_shape_keys() {
        assert_eq!(parse_index(" 3, 4").unwrap(), (3, 4));
        assert!(parse_index("3;4").is_err());
    }
}
