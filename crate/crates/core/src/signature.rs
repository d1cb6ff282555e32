//! Finite presentations of strict monoidal categories.
//!
//! A [`Signature`] declares object generators and morphism generators. Objects
//! of the presented category are [`ObjectWord`]s: finite sequences of object
//! generators, tensored by concatenation, with the empty word as the unit.
//! There are no relations between generators.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("`{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("object `{0}` declared twice")]
    DuplicateObject(String),
    #[error("generator `{0}` declared twice")]
    DuplicateGenerator(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
}

/// ASCII letters, digits and `_`, starting with a letter.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A tensor product of object generators. The empty word is the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectWord(Vec<String>);

impl ObjectWord {
    pub fn unit() -> Self {
        ObjectWord(Vec::new())
    }

    pub fn new<I, S>(factors: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ObjectWord(factors.into_iter().map(Into::into).collect())
    }

    pub fn factors(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tensor(&self, other: &ObjectWord) -> ObjectWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        ObjectWord(v)
    }
}

impl fmt::Display for ObjectWord {
    /// Space separated factors, or `1` for the unit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        f.write_str(&self.0.join(" "))
    }
}

/// Strict n-ary tensor on objects: concatenation in sequence order.
pub fn word_concat<'a, I>(words: I) -> ObjectWord
where
    I: IntoIterator<Item = &'a ObjectWord>,
{
    ObjectWord(
        words
            .into_iter()
            .flat_map(|w| w.0.iter().cloned())
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MorGen {
    pub name: String,
    pub dom: ObjectWord,
    pub cod: ObjectWord,
}

/// A morphism that may label a diagram node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    /// A morphism generator, by name.
    Gen(String),
    /// The identity on a word.
    IdOn(ObjectWord),
}

impl Factor {
    pub fn gen(name: impl Into<String>) -> Self {
        Factor::Gen(name.into())
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Factor::IdOn(_))
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Gen(name) => f.write_str(name),
            Factor::IdOn(w) => write!(f, "id[{}]", w.factors().join(" ")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    objects: Vec<String>,
    gens: Vec<MorGen>,
    gen_index: HashMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_object(&mut self, name: &str) -> Result<(), SignatureError> {
        if !is_identifier(name) {
            return Err(SignatureError::BadIdentifier(name.to_owned()));
        }
        if self.has_object(name) {
            return Err(SignatureError::DuplicateObject(name.to_owned()));
        }
        self.objects.push(name.to_owned());
        Ok(())
    }

    pub fn add_gen(
        &mut self,
        name: &str,
        dom: ObjectWord,
        cod: ObjectWord,
    ) -> Result<(), SignatureError> {
        if !is_identifier(name) {
            return Err(SignatureError::BadIdentifier(name.to_owned()));
        }
        if self.gen_index.contains_key(name) {
            return Err(SignatureError::DuplicateGenerator(name.to_owned()));
        }
        self.check_word(&dom)?;
        self.check_word(&cod)?;
        self.gen_index.insert(name.to_owned(), self.gens.len());
        self.gens.push(MorGen {
            name: name.to_owned(),
            dom,
            cod,
        });
        Ok(())
    }

    /// Builder-style [`Signature::add_object`] that panics on error; for fixtures.
    pub fn with_object(mut self, name: &str) -> Self {
        self.add_object(name).expect("invalid object declaration");
        self
    }

    /// Builder-style [`Signature::add_gen`] that panics on error; for fixtures.
    pub fn with_gen(mut self, name: &str, dom: &[&str], cod: &[&str]) -> Self {
        self.add_gen(
            name,
            ObjectWord::new(dom.iter().copied()),
            ObjectWord::new(cod.iter().copied()),
        )
        .expect("invalid generator declaration");
        self
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn gens(&self) -> &[MorGen] {
        &self.gens
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.objects.iter().any(|o| o == name)
    }

    pub fn gen(&self, name: &str) -> Result<&MorGen, SignatureError> {
        self.gen_index
            .get(name)
            .map(|&i| &self.gens[i])
            .ok_or_else(|| SignatureError::UnknownGenerator(name.to_owned()))
    }

    pub fn check_word(&self, w: &ObjectWord) -> Result<(), SignatureError> {
        match w.factors().iter().find(|o| !self.has_object(o)) {
            Some(o) => Err(SignatureError::UnknownObject(o.clone())),
            None => Ok(()),
        }
    }

    pub fn check_factor(&self, f: &Factor) -> Result<(), SignatureError> {
        self.factor_dom_cod(f).map(|_| ())
    }

    /// Domain and codomain of a factor.
    pub fn factor_dom_cod(&self, f: &Factor) -> Result<(ObjectWord, ObjectWord), SignatureError> {
        match f {
            Factor::Gen(name) => {
                let g = self.gen(name)?;
                Ok((g.dom.clone(), g.cod.clone()))
            }
            Factor::IdOn(w) => {
                self.check_word(w)?;
                Ok((w.clone(), w.clone()))
            }
        }
    }
}
