# App 3 package
