//! CSV and self-contained SVG output for embeddings and ROC curves.

use std::fmt::Write as _;

use ndarray::{concatenate, ArrayView2, Axis};

use crate::baselines::{fit_mlp, MlpConfig};
use crate::error::{Error, Result};
use crate::eval::{auc, roc_curve};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointTag {
    RealBenign,
    RealMalignant,
    MeanImputedBenign,
    MeanImputedMalignant,
    AeImputedBenign,
    AeImputedMalignant,
    GeneratedBenign,
    GeneratedMalignant,
}

impl PointTag {
    pub const ALL: [PointTag; 8] = [
        PointTag::RealBenign,
        PointTag::RealMalignant,
        PointTag::MeanImputedBenign,
        PointTag::MeanImputedMalignant,
        PointTag::AeImputedBenign,
        PointTag::AeImputedMalignant,
        PointTag::GeneratedBenign,
        PointTag::GeneratedMalignant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PointTag::RealBenign => "real-benign",
            PointTag::RealMalignant => "real-malignant",
            PointTag::MeanImputedBenign => "mean-imputed-benign",
            PointTag::MeanImputedMalignant => "mean-imputed-malignant",
            PointTag::AeImputedBenign => "ae-imputed-benign",
            PointTag::AeImputedMalignant => "ae-imputed-malignant",
            PointTag::GeneratedBenign => "generated-benign",
            PointTag::GeneratedMalignant => "generated-malignant",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        PointTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown point tag {s:?}")))
    }

    /// Picks the benign or malignant variant of a family by label.
    pub fn for_label(benign: PointTag, malignant: PointTag, label: u8) -> PointTag {
        if label == 1 {
            malignant
        } else {
            benign
        }
    }

    fn color(self) -> &'static str {
        match self {
            PointTag::RealBenign => "#1f77b4",
            PointTag::RealMalignant => "#d62728",
            PointTag::MeanImputedBenign => "#17becf",
            PointTag::MeanImputedMalignant => "#ff7f0e",
            PointTag::AeImputedBenign => "#2ca02c",
            PointTag::AeImputedMalignant => "#9467bd",
            PointTag::GeneratedBenign => "#7f7f7f",
            PointTag::GeneratedMalignant => "#e377c2",
        }
    }
}

pub fn embedding_csv(coords: ArrayView2<f64>, tags: &[PointTag]) -> Result<String> {
    if coords.ncols() != 2 || coords.nrows() != tags.len() {
        return Err(Error::Shape(format!(
            "{:?} coordinates for {} tags",
            coords.dim(),
            tags.len()
        )));
    }
    let mut out = String::from("tag,x,y\n");
    for (row, tag) in coords.rows().into_iter().zip(tags) {
        let _ = writeln!(out, "{},{},{}", tag.as_str(), row[0], row[1]);
    }
    Ok(out)
}

/// Reads `tag,x,y` rows back; unknown tags are domain errors.
pub fn parse_embedding_csv(text: &str) -> Result<Vec<(PointTag, f64, f64)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let parse_err = |msg: String| Error::Parse { line: idx + 1, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(parse_err(format!("expected 3 fields, got {}", f.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| parse_err(format!("bad number {s:?}")))
        };
        out.push((PointTag::parse(f[0])?, num(f[1])?, num(f[2])?));
    }
    Ok(out)
}

fn svg_open(out: &mut String, width: f64, height: f64, note: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"11\">"
    );
    if !note.is_empty() {
        let _ = writeln!(out, "<!-- {} -->", note.replace("--", "- -"));
    }
    let _ = writeln!(
        out,
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>"
    );
}

/// Scatter plot of an embedding, one colour per tag, with a legend.
pub fn embedding_svg(coords: ArrayView2<f64>, tags: &[PointTag], note: &str) -> Result<String> {
    embedding_csv(coords, tags)?;
    let (w, h, pad) = (640.0, 520.0, 30.0);
    let plot = 460.0;
    let mut out = String::new();
    svg_open(&mut out, w, h, note);
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for r in coords.rows() {
        xmin = xmin.min(r[0]);
        xmax = xmax.max(r[0]);
        ymin = ymin.min(r[1]);
        ymax = ymax.max(r[1]);
    }
    let sx = plot / (xmax - xmin).max(1e-12);
    let sy = plot / (ymax - ymin).max(1e-12);
    let _ = writeln!(
        out,
        "<rect x=\"{pad}\" y=\"{pad}\" width=\"{plot}\" height=\"{plot}\" fill=\"none\" stroke=\"black\"/>"
    );
    for (r, t) in coords.rows().into_iter().zip(tags) {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.2\" fill=\"{}\" fill-opacity=\"0.7\"/>",
            pad + (r[0] - xmin) * sx,
            pad + plot - (r[1] - ymin) * sy,
            t.color()
        );
    }
    let mut present: Vec<PointTag> = tags.to_vec();
    present.sort();
    present.dedup();
    for (k, t) in present.iter().enumerate() {
        let y = pad + 10.0 + 18.0 * k as f64;
        let x = pad + plot + 15.0;
        let _ = writeln!(
            out,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"4\" fill=\"{}\"/><text x=\"{}\" y=\"{}\">{}</text>",
            t.color(),
            x + 8.0,
            y + 4.0,
            t.as_str()
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// One curve of a ROC figure.
#[derive(Debug, Clone, PartialEq)]
pub struct RocLine {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

/// Axis window of one ROC panel.
struct Panel {
    x0: f64,
    y0: f64,
    size: f64,
    fpr: (f64, f64),
    tpr: (f64, f64),
}

impl Panel {
    fn map(&self, f: f64, t: f64) -> (f64, f64) {
        let u = (f - self.fpr.0) / (self.fpr.1 - self.fpr.0);
        let v = (t - self.tpr.0) / (self.tpr.1 - self.tpr.0);
        (self.x0 + u * self.size, self.y0 + self.size - v * self.size)
    }

    fn draw(&self, out: &mut String, curves: &[RocLine], id: &str) {
        let (x0, y0, s) = (self.x0, self.y0, self.size);
        let _ = writeln!(
            out,
            "<clipPath id=\"{id}\"><rect x=\"{x0}\" y=\"{y0}\" width=\"{s}\" height=\"{s}\"/></clipPath>"
        );
        let _ = writeln!(
            out,
            "<rect x=\"{x0}\" y=\"{y0}\" width=\"{s}\" height=\"{s}\" fill=\"none\" stroke=\"black\"/>"
        );
        for k in 0..=4 {
            let frac = k as f64 / 4.0;
            let f = self.fpr.0 + frac * (self.fpr.1 - self.fpr.0);
            let t = self.tpr.0 + frac * (self.tpr.1 - self.tpr.0);
            let (px, _) = self.map(f, self.tpr.0);
            let (_, py) = self.map(self.fpr.0, t);
            let _ = writeln!(
                out,
                "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{f:.2}</text>\
                 <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{t:.2}</text>",
                y0 + s + 14.0,
                x0 - 4.0,
                py + 4.0
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">False positive rate</text>",
            x0 + s / 2.0,
            y0 + s + 30.0
        );
        let (ax, ay) = self.map(self.fpr.0.max(self.tpr.0), self.fpr.0.max(self.tpr.0));
        let (bx, by) = self.map(self.fpr.1.min(self.tpr.1), self.fpr.1.min(self.tpr.1));
        let _ = writeln!(
            out,
            "<line x1=\"{ax:.2}\" y1=\"{ay:.2}\" x2=\"{bx:.2}\" y2=\"{by:.2}\" stroke=\"#bbbbbb\" \
             stroke-dasharray=\"4 3\" clip-path=\"url(#{id})\"/>"
        );
        for (k, line) in curves.iter().enumerate() {
            let path: Vec<String> = line
                .points
                .iter()
                .map(|&(f, t)| {
                    let (x, y) = self.map(f, t);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} clip-path=\"url(#{id})\"/>",
                path.join(" "),
                PALETTE[k % PALETTE.len()],
                dash(line.dashed)
            );
        }
    }
}

/// Upper-left window shown in the zoom panel.
pub const ROC_ZOOM: ((f64, f64), (f64, f64)) = ((0.0, 0.2), (0.8, 1.0));

fn dash(on: bool) -> &'static str {
    if on {
        " stroke-dasharray=\"6 3\""
    } else {
        ""
    }
}

/// Two panels, the full ROC square and a zoom on the upper-left corner,
/// with the legend on the right.
pub fn roc_svg(curves: &[RocLine], note: &str) -> String {
    let mut out = String::new();
    let height = (460.0f64).max(40.0 + 16.0 * curves.len() as f64);
    svg_open(&mut out, 1100.0, height, note);
    let full = Panel {
        x0: 50.0,
        y0: 20.0,
        size: 360.0,
        fpr: (0.0, 1.0),
        tpr: (0.0, 1.0),
    };
    let zoom = Panel {
        x0: 480.0,
        y0: 20.0,
        size: 360.0,
        fpr: ROC_ZOOM.0,
        tpr: ROC_ZOOM.1,
    };
    full.draw(&mut out, curves, "full");
    zoom.draw(&mut out, curves, "zoom");
    let _ = writeln!(
        out,
        "<text x=\"15\" y=\"200\" transform=\"rotate(-90 15 200)\" text-anchor=\"middle\">True positive rate</text>"
    );
    for (k, line) in curves.iter().enumerate() {
        let y = 30.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            "<line x1=\"870\" y1=\"{:.1}\" x2=\"895\" y2=\"{:.1}\" stroke=\"{}\" stroke-width=\"2\"{}/>\
             <text x=\"900\" y=\"{y:.1}\">{}</text>",
            y - 4.0,
            y - 4.0,
            PALETTE[k % PALETTE.len()],
            dash(line.dashed),
            line.label
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Held-out AUC of a fresh 30-50-1 network separating `real` (label 0) from
/// `generated` (label 1). Near 0.5 means the two sets are hard to tell apart.
pub fn two_sample_probe_auc(
    real: ArrayView2<f64>,
    generated: ArrayView2<f64>,
    seed: u64,
) -> Result<f64> {
    let x = concatenate(Axis(0), &[real, generated])
        .map_err(|e| Error::Shape(format!("probe inputs: {e}")))?;
    let y: Vec<u8> = std::iter::repeat_n(0, real.nrows())
        .chain(std::iter::repeat_n(1, generated.nrows()))
        .collect();
    let plan = crate::data::stratified_kfold(&y, 3, seed)?;
    let train = plan.train_rows(0);
    let test = plan.test_rows(0);
    let pick = |rows: &[usize]| -> Vec<u8> { rows.iter().map(|&i| y[i]).collect() };
    let model = fit_mlp(
        x.select(Axis(0), &train).view(),
        &pick(&train),
        &MlpConfig {
            seed: seed::derive(seed, &[0x9be]),
            ..Default::default()
        },
    )?;
    let scores = model.predict_proba(x.select(Axis(0), &test).view())?;
    Ok(auc(&roc_curve(
        scores.as_slice().expect("contiguous"),
        &pick(&test),
    )?))
}
