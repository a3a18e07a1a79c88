//! Pixel-space geometry: points, axis-aligned boxes, and IoU.
//!
//! Coordinates are absolute pixels in the screenshot's coordinate system,
//! origin at the top-left, x growing right and y growing down.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("invalid box [{left},{top},{right},{bottom}]: requires left < right and top < bottom")]
    InvalidBox {
        left: u32,
        top: u32,
        right: u32,
        bottom: u32,
    },
}

/// A pixel position on the screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

impl Point {
    pub fn new(x: u32, y: u32) -> Self {
        Point { x, y }
    }
}

/// An axis-aligned pixel box with `left < right` and `top < bottom`.
///
/// Serialized as the 4-tuple `[left, top, right, bottom]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBox", into = "RawBox")]
pub struct BBox {
    pub left: u32,
    pub top: u32,
    pub right: u32,
    pub bottom: u32,
}

#[derive(Serialize, Deserialize)]
struct RawBox(u32, u32, u32, u32);

impl TryFrom<RawBox> for BBox {
    type Error = GeometryError;

    fn try_from(r: RawBox) -> Result<Self, Self::Error> {
        BBox::new(r.0, r.1, r.2, r.3)
    }
}

impl From<BBox> for RawBox {
    fn from(b: BBox) -> Self {
        RawBox(b.left, b.top, b.right, b.bottom)
    }
}

impl BBox {
    pub fn new(left: u32, top: u32, right: u32, bottom: u32) -> Result<Self, GeometryError> {
        let b = BBox {
            left,
            top,
            right,
            bottom,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.left < self.right && self.top < self.bottom {
            Ok(())
        } else {
            Err(GeometryError::InvalidBox {
                left: self.left,
                top: self.top,
                right: self.right,
                bottom: self.bottom,
            })
        }
    }

    /// Square box of side `2 * radius` centered on `p`, clipped at the
    /// coordinate range's ends (coordinates never go negative or overflow).
    pub fn around_point(p: Point, radius: u32) -> Self {
        let radius = radius.max(1);
        BBox {
            left: p.x.saturating_sub(radius),
            top: p.y.saturating_sub(radius),
            right: p.x.saturating_add(radius),
            bottom: p.y.saturating_add(radius),
        }
    }

    /// Tight bounding box over a point path. Any zero-extent axis is dilated
    /// by `dilate_px` on both sides (clipped at the origin) so that straight
    /// swipe paths still carry measurable area.
    pub fn around_path(path: &[Point], dilate_px: u32) -> Option<Self> {
        let first = path.first()?;
        let (mut l, mut t, mut r, mut b) = (first.x, first.y, first.x, first.y);
        for p in &path[1..] {
            l = l.min(p.x);
            t = t.min(p.y);
            r = r.max(p.x);
            b = b.max(p.y);
        }
        let dilate = dilate_px.max(1);
        if l == r {
            l = l.saturating_sub(dilate);
            r = r.saturating_add(dilate);
        }
        if t == b {
            t = t.saturating_sub(dilate);
            b = b.saturating_add(dilate);
        }
        Some(BBox {
            left: l,
            top: t,
            right: r,
            bottom: b,
        })
    }

    pub fn width(&self) -> u32 {
        self.right - self.left
    }

    pub fn height(&self) -> u32 {
        self.bottom - self.top
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    /// Containment is inclusive of all four edges.
    pub fn contains(&self, p: Point) -> bool {
        self.left <= p.x && p.x <= self.right && self.top <= p.y && p.y <= self.bottom
    }

    pub fn center(&self) -> Point {
        Point {
            x: self.left + self.width() / 2,
            y: self.top + self.height() / 2,
        }
    }

    fn intersection_area(&self, other: &BBox) -> u64 {
        let l = self.left.max(other.left);
        let t = self.top.max(other.top);
        let r = self.right.min(other.right);
        let b = self.bottom.min(other.bottom);
        if l < r && t < b {
            (r - l) as u64 * (b - t) as u64
        } else {
            0
        }
    }
}

/// Intersection over union of two boxes, in `[0, 1]`; 0 when disjoint.
pub fn iou<S: Scalar>(a: &BBox, b: &BBox) -> S {
    // u128: the sum of two near-maximal u64 areas would wrap.
    let inter = a.intersection_area(b) as u128;
    let union = a.area() as u128 + b.area() as u128 - inter;
    if union == 0 {
        return S::zero();
    }
    S::from_f64(inter as f64 / union as f64).unwrap()
}

/// An OCR'd page element: its text content and where it sits on the screen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiElement {
    pub text: String,
    #[serde(rename = "box")]
    pub bounds: BBox,
}

impl UiElement {
    pub fn new(text: impl Into<String>, bounds: BBox) -> Self {
        UiElement {
            text: text.into(),
            bounds,
        }
    }
}
