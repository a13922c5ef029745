//! Built-in models and their harmonic families.

use thiserror::Error;

pub mod bianchi2;
pub mod family;
pub mod file;
pub mod hypergeometric;
pub mod legendre;
pub mod so3;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0}")]
    Label(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Legendre(#[from] legendre::LegendreError),
    #[error(transparent)]
    Split(#[from] crate::split::SplitError),
    #[error(transparent)]
    Casimir(#[from] crate::casimir::CasimirError),
    #[error(transparent)]
    Hypergeometric(#[from] hypergeometric::HypergeometricError),
    #[error(transparent)]
    Tensor(#[from] crate::tensor::TensorError),
}

/// Recomputes every certificate of a built-in family in place.
pub fn certify(fam: &mut family::HarmonicFamily) -> Result<(), ModelError> {
    match fam.model.as_str() {
        "so3" => so3::certify_family(&so3::So3Model::new(), fam),
        "bianchi2" => bianchi2::certify_family(&bianchi2::Bianchi2Model::new(), fam),
        other => Err(ModelError::Input(format!("unknown model `{other}`"))),
    }
}

/// Rebuilds a family from its document and recomputes every certificate.
pub fn recertify(doc: &family::FamilyDoc) -> Result<family::HarmonicFamily, ModelError> {
    let mut fam = match doc.model.as_str() {
        "so3" => family::HarmonicFamily::from_doc(doc, |c| so3::So3Model::new().chart(c))?,
        "bianchi2" => family::HarmonicFamily::from_doc(doc, |c| bianchi2::Bianchi2Model::new().chart(c))?,
        other => return Err(ModelError::Input(format!("unknown model `{other}`"))),
    };
    certify(&mut fam)?;
    Ok(fam)
}
