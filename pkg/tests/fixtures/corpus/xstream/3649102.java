XStream xstream = new XStream();
xstream.alias("person", Person.class);
String xml = xstream.toXML(person);
